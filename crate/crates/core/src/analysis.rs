//! Equilibrium families, finite-difference Jacobians, eigenvalues and the
//! reduced three-level vector field.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

use crate::model::{self, CommunityState, Group, ModelError, ModelParams, Variant, VectorField};

/// Real parts within this distance of zero are reported as critical.
pub const CRITICAL_EPS: f64 = 1e-6;

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("R0 = {r0} outside the family range [0, {max}]")]
    FamilyRange { r0: f64, max: f64 },
    #[error("the reduced system needs the no-clique model on the three-level grid")]
    NotThreeLevel,
    #[error("point ({r0}, {r2}) outside the simplex R0, R2 >= 0, R0 + R2 <= 1")]
    OutsideSimplex { r0: f64, r2: f64 },
    #[error("vector field lattice needs n >= 2, got {0}")]
    Resolution(usize),
    #[error("matrix must be square with dimension <= 64, got {0}x{1}")]
    MatrixShape(usize, usize),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Member of the one-parameter equilibrium family of a variant: regular mass
/// split between the lowest and highest level, agenda groups at the lowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSpec {
    pub r0: f64,
}

/// Upper end of the family parameter, `1 - f_cl - f_acl`.
pub fn family_max(params: &ModelParams) -> f64 {
    params.group_fraction(Group::Regular)
}

/// The fixed family sample points `{0, 0.25, 0.5, 0.75, max}` that fit in range.
pub fn family_samples(params: &ModelParams) -> Vec<f64> {
    let max = family_max(params);
    let mut out: Vec<f64> = [0.0, 0.25, 0.5, 0.75]
        .into_iter()
        .filter(|&r| r < max)
        .collect();
    out.push(max);
    out
}

pub fn proposition_equilibrium(
    spec: EquilibriumSpec,
    params: &ModelParams,
) -> Result<CommunityState, AnalysisError> {
    let max = family_max(params);
    if !(0.0..=max).contains(&spec.r0) {
        return Err(AnalysisError::FamilyRange { r0: spec.r0, max });
    }
    let top = params.steps();
    let mut s = CommunityState::zeros(params);
    {
        let reg = s.group_mut(Group::Regular);
        reg[0] = spec.r0;
        reg[top] += max - spec.r0;
    }
    for &g in &params.variant.groups()[1..] {
        s.group_mut(g)[0] = params.group_fraction(g);
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    pub is_equilibrium: bool,
    /// Sup-norm of the vector field at the point.
    pub residual: f64,
    pub pc: f64,
}

pub fn verify_equilibrium(
    state: &CommunityState,
    params: &ModelParams,
    tol: f64,
) -> EquilibriumCheck {
    let field = VectorField::new(params);
    let residual = field.residual(state.as_slice());
    EquilibriumCheck {
        is_equilibrium: residual <= tol,
        residual,
        pc: field.overall_pc(state.as_slice()),
    }
}

fn require_three_level(params: &ModelParams) -> Result<(), AnalysisError> {
    if params.variant != Variant::NoClique || params.steps() != 2 {
        return Err(AnalysisError::NotThreeLevel);
    }
    Ok(())
}

fn reduced_unchecked(field: &VectorField<'_>, r0: f64, r2: f64, out: &mut [f64]) {
    let r1 = 1.0 - r0 - r2;
    let tables = [r0, r1, r2];
    let params = field.params();
    let e = model::snapshot(&CommunityState::from_groups(&[&tables]), params)
        .eval
        .e_reg;
    out[0] = -r0 * e[0] + r1 * (1.0 - e[1]);
    out[1] = r1 * e[1] - r2 * (1.0 - e[2]);
}

fn reduced_raw(params: &ModelParams, r0: f64, r2: f64, out: &mut [f64]) {
    // Same field without clamping, for derivatives taken across R1 = 0.
    let field = VectorField::unclamped(params);
    let r1 = 1.0 - r0 - r2;
    let mut d = [0.0; 3];
    field.eval(&[r0, r1, r2], &mut d);
    out[0] = d[0];
    out[1] = d[2];
}

/// Two-dimensional system obtained by eliminating `R1 = 1 - R0 - R2`.
pub fn reduced3_rhs(r0: f64, r2: f64, params: &ModelParams) -> Result<(f64, f64), AnalysisError> {
    require_three_level(params)?;
    let tol = 1e-12;
    if r0 < 0.0 || r2 < 0.0 || r0 + r2 > 1.0 + tol {
        return Err(AnalysisError::OutsideSimplex { r0, r2 });
    }
    let mut out = [0.0; 2];
    reduced_unchecked(&VectorField::new(params), r0, r2, &mut out);
    Ok((out[0], out[1]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub r0: f64,
    pub r2: f64,
    pub dr0: f64,
    pub dr2: f64,
}

/// Reduced field on the lattice `(i, j) / (n - 1)` restricted to the simplex,
/// ordered by `i` then `j`.
pub fn vector_field_grid(
    params: &ModelParams,
    n: usize,
) -> Result<Vec<FieldSample>, AnalysisError> {
    require_three_level(params)?;
    if n < 2 {
        return Err(AnalysisError::Resolution(n));
    }
    let field = VectorField::new(params);
    let m = n - 1;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    let mut d = [0.0; 2];
    for i in 0..=m {
        for j in 0..=(m - i) {
            let r0 = i as f64 / m as f64;
            let r2 = j as f64 / m as f64;
            reduced_unchecked(&field, r0, r2, &mut d);
            out.push(FieldSample {
                r0,
                r2,
                dr0: d[0],
                dr2: d[1],
            });
        }
    }
    Ok(out)
}

/// Central-difference Jacobian of `f` at `x`, one column per coordinate.
pub fn central_jacobian<F>(mut f: F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut probe = x.to_vec();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        probe[j] = x[j] + h;
        f(&probe, &mut plus);
        probe[j] = x[j] - h;
        f(&probe, &mut minus);
        probe[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Jacobian of the full vector field at `state`.
pub fn jacobian(state: &CommunityState, params: &ModelParams, h: f64) -> DMatrix<f64> {
    let field = VectorField::unclamped(params);
    central_jacobian(|y, dy| field.eval(y, dy), state.as_slice(), h)
}

/// Jacobian of the reduced three-level system at `(r0, r2)`.
pub fn reduced_jacobian(
    r0: f64,
    r2: f64,
    params: &ModelParams,
    h: f64,
) -> Result<DMatrix<f64>, AnalysisError> {
    require_three_level(params)?;
    Ok(central_jacobian(
        |x, out| reduced_raw(params, x[0], x[1], out),
        &[r0, r2],
        h,
    ))
}

/// Eigenvalues sorted by real part, then imaginary part.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, AnalysisError> {
    let (rows, cols) = m.shape();
    if rows != cols || rows > 64 {
        return Err(AnalysisError::MatrixShape(rows, cols));
    }
    let mut vals: Vec<Complex<f64>> = match rows {
        0 => Vec::new(),
        1 => vec![Complex::new(m[(0, 0)], 0.0)],
        2 => {
            let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = half_tr * half_tr - det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                vec![
                    Complex::new(half_tr - s, 0.0),
                    Complex::new(half_tr + s, 0.0),
                ]
            } else {
                let s = (-disc).sqrt();
                vec![Complex::new(half_tr, -s), Complex::new(half_tr, s)]
            }
        }
        _ => m
            .clone()
            .try_schur(1e-14, 10_000)
            .ok_or(AnalysisError::NoConvergence)?
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect(),
    };
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// At least one eigenvalue has a real part within [`CRITICAL_EPS`] of
    /// zero, so linearization decides nothing.
    Critical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex<f64>>,
    pub residual: f64,
    pub pc_at_point: f64,
}

impl StabilityReport {
    pub fn classify(&self) -> Stability {
        if self.eigenvalues.iter().any(|z| z.re > CRITICAL_EPS) {
            Stability::Unstable
        } else if self.eigenvalues.iter().any(|z| z.re.abs() <= CRITICAL_EPS) {
            Stability::Critical
        } else {
            Stability::Stable
        }
    }
}

pub fn stability_report(
    state: &CommunityState,
    params: &ModelParams,
    h: f64,
) -> Result<StabilityReport, AnalysisError> {
    let check = verify_equilibrium(state, params, 0.0);
    Ok(StabilityReport {
        eigenvalues: eigenvalues(&jacobian(state, params, h))?,
        residual: check.residual,
        pc_at_point: check.pc,
    })
}

pub fn reduced_stability_report(
    r0: f64,
    r2: f64,
    params: &ModelParams,
    h: f64,
) -> Result<StabilityReport, AnalysisError> {
    let (d0, d2) = reduced3_rhs(r0, r2, params)?;
    let state = CommunityState::from_groups(&[&[r0, 1.0 - r0 - r2, r2]]);
    Ok(StabilityReport {
        eigenvalues: eigenvalues(&reduced_jacobian(r0, r2, params, h)?)?,
        residual: d0.abs().max(d2.abs()),
        pc_at_point: model::overall_pc(&state, params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BehaviorParams;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn family_members() {
        let p = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        let s = proposition_equilibrium(EquilibriumSpec { r0: 0.0 }, &p).unwrap();
        assert_eq!(s.regular()[10], 1.0);
        let s = proposition_equilibrium(EquilibriumSpec { r0: 0.0425 }, &p).unwrap();
        assert_eq!(s.regular()[0], 0.0425);
        assert!(close(s.regular()[10], 0.9575, 1e-15));

        let p =
            ModelParams::two_cliques(10, BehaviorParams::default(), 0.3, 0.3, 0.01, 1.0).unwrap();
        let s = proposition_equilibrium(EquilibriumSpec { r0: 0.0 }, &p).unwrap();
        assert!(close(s.regular()[10], 0.4, 1e-15));
        assert_eq!(s.clique()[0], 0.3);
        assert_eq!(s.anticlique()[0], 0.3);
        assert!(proposition_equilibrium(EquilibriumSpec { r0: 0.5 }, &p).is_err());
        assert_eq!(family_samples(&p), vec![0.0, 0.25, family_max(&p)]);
    }

    #[test]
    fn verification_outcomes() {
        let p = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        let eq = proposition_equilibrium(EquilibriumSpec { r0: 0.3 }, &p).unwrap();
        let c = verify_equilibrium(&eq, &p, 1e-12);
        assert!(c.is_equilibrium && c.residual <= 1e-12 && c.pc == 1.0);

        let s = CommunityState::point_masses(&p, &[6]).unwrap();
        let c = verify_equilibrium(&s, &p, 1e-12);
        assert!(!c.is_equilibrium && c.residual >= 0.99);
        assert!(close(c.pc, 0.648, 1e-15));
    }

    #[test]
    fn uniform_state_is_not_stationary() {
        // L = 2, uniform: s = (0, 1/3, 2/3), p_ind = 1/3*1/2 + 2/3 = 5/6,
        // p_c = (25/36)(3 - 5/3) = 25/27, e = (2/27, 1/2, 25/27),
        // dR0 = -1/3*2/27 + 1/3*1/2 = 23/162.
        let p = ModelParams::no_clique(2, 0.0, 0.0).unwrap();
        let third = 1.0 / 3.0;
        let s = CommunityState::from_groups(&[&[third, third, third]]);
        let d = model::rhs(&s, &p);
        assert!(close(d.regular()[0], 23.0 / 162.0, 1e-15));
        assert!(!verify_equilibrium(&s, &p, 1e-12).is_equilibrium);
    }

    #[test]
    fn reduced_matches_full_system() {
        let p = ModelParams::no_clique(2, 0.0, 0.0).unwrap();
        let (d0, d2) = reduced3_rhs(0.2, 0.3, &p).unwrap();
        let full = model::rhs(&CommunityState::from_groups(&[&[0.2, 0.5, 0.3]]), &p);
        assert!(close(d0, full.regular()[0], 1e-14));
        assert!(close(d2, full.regular()[2], 1e-14));
        assert_eq!(reduced3_rhs(1.0, 0.0, &p).unwrap(), (0.0, 0.0));
        assert!(reduced3_rhs(0.7, 0.7, &p).is_err());
        let p10 = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        assert_eq!(
            reduced3_rhs(0.2, 0.3, &p10),
            Err(AnalysisError::NotThreeLevel)
        );
    }

    #[test]
    fn lattice_geometry() {
        let p = ModelParams::no_clique(2, 1.0, -1.0).unwrap();
        let g = vector_field_grid(&p, 2).unwrap();
        let corners: Vec<(f64, f64)> = g.iter().map(|s| (s.r0, s.r2)).collect();
        assert_eq!(corners, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]);
        let g = vector_field_grid(&p, 11).unwrap();
        assert_eq!(g.len(), 66);
        let probe = g
            .iter()
            .find(|s| close(s.r0, 0.2, 1e-12) && close(s.r2, 0.3, 1e-12))
            .unwrap();
        let (d0, d2) = reduced3_rhs(probe.r0, probe.r2, &p).unwrap();
        assert_eq!((probe.dr0, probe.dr2), (d0, d2));
        for s in g.iter().filter(|s| close(s.r0 + s.r2, 1.0, 1e-12)) {
            assert!(s.dr0.abs() <= 1e-15 && s.dr2.abs() <= 1e-15);
        }
        assert!(vector_field_grid(&p, 1).is_err());
    }

    #[test]
    fn jacobian_of_linear_map() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, -2.0, 0.5, 0.0, 3.0, 1.0, -1.0, 0.25, 2.0]);
        let j = central_jacobian(
            |x, out| {
                for i in 0..3 {
                    out[i] = (0..3).map(|k| a[(i, k)] * x[k]).sum();
                }
            },
            &[0.3, -0.1, 2.0],
            1e-6,
        );
        assert!((j - &a).abs().max() <= 1e-8);
    }

    #[test]
    fn jacobian_second_order_in_step() {
        // f(x, y) = (x^2 y + sin x, x y^3); error of central differences ~ h^2.
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[0] * x[1] + x[0].sin();
            out[1] = x[0] * x[1].powi(3);
        };
        let p = [0.7_f64, 1.3];
        let exact = DMatrix::from_row_slice(
            2,
            2,
            &[
                2.0 * p[0] * p[1] + p[0].cos(),
                p[0] * p[0],
                p[1].powi(3),
                3.0 * p[0] * p[1] * p[1],
            ],
        );
        let e1 = (central_jacobian(f, &p, 1e-2) - &exact).abs().max();
        let e2 = (central_jacobian(f, &p, 5e-3) - &exact).abs().max();
        assert!((e1 / e2 - 4.0).abs() < 0.1, "ratio {}", e1 / e2);
    }

    #[test]
    fn eigenvalue_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(eigenvalues(&id).unwrap(), vec![Complex::new(1.0, 0.0); 2]);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(
            eigenvalues(&rot).unwrap(),
            vec![Complex::new(0.0, -1.0), Complex::new(0.0, 1.0)]
        );
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5]);
        let ev = eigenvalues(&m).unwrap();
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        assert!(close(re[0], -1.0, 1e-12) && close(re[1], 0.5, 1e-12) && close(re[2], 2.0, 1e-12));
        assert!(eigenvalues(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn reduced_equilibrium_spectrum() {
        for (alpha, sigma) in [(0.0, 0.0), (1.0, -1.0), (-0.5, 0.7)] {
            let p = ModelParams::no_clique(2, alpha, sigma).unwrap();
            let report = reduced_stability_report(0.5, 0.5, &p, DEFAULT_FD_STEP).unwrap();
            let ev = &report.eigenvalues;
            assert!(
                close(ev[0].re, -1.0, 1e-6) && close(ev[1].re, 0.0, 1e-6),
                "{ev:?}"
            );
            assert!(ev.iter().all(|z| z.im.abs() <= 1e-6));
            assert_eq!(report.classify(), Stability::Critical);
            assert_eq!(report.pc_at_point, 1.0);
        }
    }

    #[test]
    fn full_jacobian_at_equilibrium() {
        let p = ModelParams::no_clique(6, 0.0, 0.0).unwrap();
        let eq = proposition_equilibrium(EquilibriumSpec { r0: 0.4 }, &p).unwrap();
        let report = stability_report(&eq, &p, DEFAULT_FD_STEP).unwrap();
        assert_eq!(report.eigenvalues.len(), 7);
        assert!(report.eigenvalues.iter().all(|z| z.re <= CRITICAL_EPS));
    }
}
