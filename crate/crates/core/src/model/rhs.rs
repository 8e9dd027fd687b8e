use super::probs::{snapshot_from_slice, Clip, LevelTables};
use super::{CommunityState, ModelParams};

/// Reputation flow of one group: members at level `k` move up with
/// probability `e_k` and down otherwise, clipped at both ends of the grid.
fn group_flow(mass: &[f64], e: &[f64], out: &mut [f64]) {
    let last = mass.len() - 1;
    for k in 0..=last {
        let mut d = 0.0;
        if k > 0 {
            d += mass[k - 1] * e[k - 1];
            d -= mass[k] * (1.0 - e[k]);
        }
        if k < last {
            d += mass[k + 1] * (1.0 - e[k + 1]);
            d -= mass[k] * e[k];
        }
        out[k] = d;
    }
}

/// Vector field of the cached model, evaluated on flat slices.
///
/// Holds the behavior curves so repeated evaluations during integration do
/// not recompute them.
#[derive(Debug, Clone)]
pub struct VectorField<'a> {
    params: &'a ModelParams,
    tables: LevelTables,
    clip: Clip,
}

impl<'a> VectorField<'a> {
    pub fn new(params: &'a ModelParams) -> Self {
        Self {
            params,
            tables: LevelTables::new(params),
            clip: Clip::Clamp,
        }
    }

    /// Field without clamping of negative masses, smooth across the
    /// boundary of the simplex.
    pub fn unclamped(params: &'a ModelParams) -> Self {
        Self {
            params,
            tables: LevelTables::new(params),
            clip: Clip::Raw,
        }
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.tables.r.len() * self.params.group_count()
    }

    pub fn eval(&self, y: &[f64], dy: &mut [f64]) {
        let snap = snapshot_from_slice(y, self.params, &self.tables, self.clip);
        let n = self.tables.r.len();
        for &g in self.params.variant.groups() {
            let i = g.index();
            let e = snap.eval.group(g).expect("variant group has eval probs");
            group_flow(&y[i * n..(i + 1) * n], e, &mut dy[i * n..(i + 1) * n]);
        }
    }

    /// Overall correctness at `y`.
    pub fn overall_pc(&self, y: &[f64]) -> f64 {
        snapshot_from_slice(y, self.params, &self.tables, self.clip).overall_pc()
    }

    /// Sup-norm of the field at `y`.
    pub fn residual(&self, y: &[f64]) -> f64 {
        let mut dy = vec![0.0; y.len()];
        self.eval(y, &mut dy);
        dy.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Time derivative of `state`, laid out like the state.
pub fn rhs(state: &CommunityState, params: &ModelParams) -> CommunityState {
    let mut dy = vec![0.0; state.as_slice().len()];
    VectorField::new(params).eval(state.as_slice(), &mut dy);
    CommunityState::from_flat(state.levels(), state.group_count(), dy)
}

/// Sup-norm of [`rhs`].
pub fn residual(state: &CommunityState, params: &ModelParams) -> f64 {
    VectorField::new(params).residual(state.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{overall_pc, BehaviorParams, Group};

    #[test]
    fn level_six_derivative() {
        let p = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        let s = CommunityState::point_masses(&p, &[6]).unwrap();
        let d = rhs(&s, &p);
        let d = d.regular();
        for (k, v) in d.iter().enumerate() {
            let want = match k {
                5 => 0.4704,
                6 => -1.0,
                7 => 0.5296,
                _ => 0.0,
            };
            assert!((v - want).abs() < 1e-14, "k={k}: {v} vs {want}");
        }
    }

    #[test]
    fn bimodal_line_is_stationary() {
        let p = ModelParams::no_clique(10, 1.0, -1.0).unwrap();
        for r0 in [0.0, 0.0425, 0.5, 1.0] {
            let mut s = CommunityState::zeros(&p);
            s.group_mut(Group::Regular)[0] = r0;
            s.group_mut(Group::Regular)[10] = 1.0 - r0;
            assert!(residual(&s, &p) <= 1e-15);
            assert_eq!(overall_pc(&s, &p), 1.0);
        }
    }

    #[test]
    fn one_clique_equilibrium_is_stationary() {
        let p = ModelParams::one_clique(10, BehaviorParams::new(0.5, 0.2).unwrap(), 0.2, 0.05, 0.6)
            .unwrap();
        let mut s = CommunityState::zeros(&p);
        s.group_mut(Group::Regular)[10] = 0.8;
        s.group_mut(Group::Clique)[0] = 0.2;
        assert!(residual(&s, &p) <= 1e-15);
    }

    #[test]
    fn single_step_grid_flow() {
        let p = ModelParams::no_clique(1, 0.0, 0.0).unwrap();
        let s = CommunityState::from_groups(&[&[0.5, 0.5]]);
        let d = rhs(&s, &p);
        // s = (0, 1), p_c = 1, e = a = (0, 1): nothing moves.
        assert_eq!(d.regular(), &[0.0, 0.0]);
    }
}
