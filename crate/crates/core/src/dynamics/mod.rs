//! Time integration of the community model.

pub mod dopri;

use std::ops::ControlFlow;

use thiserror::Error;

use crate::model::{CommunityState, ModelError, ModelParams, VectorField};
use dopri::{Dopri5, StepControl};

/// Group-sum drift tolerated at any trajectory sample.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error("invalid initial state: {0}")]
    InvalidInitial(#[from] ModelError),
    #[error("step size {h:e} underflowed at t = {t}; state = {state:?}")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("group masses drifted by {error:e} at t = {t}")]
    ConservationViolated { t: f64, error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub sample_interval: f64,
    /// Sup-norm of the field below which a state counts as stationary.
    pub equilibrium_eps: f64,
}

impl IntegratorSettings {
    /// Defaults: tolerances 1e-7, first step 1e-3, max step `t_end / 10`,
    /// unit sampling (or `t_end` if shorter), equilibrium threshold 1e-10.
    pub fn new(t_end: f64) -> Self {
        Self {
            abs_tol: 1e-7,
            rel_tol: 1e-7,
            t_end,
            initial_step: 1e-3,
            max_step: t_end / 10.0,
            sample_interval: t_end.min(1.0),
            equilibrium_eps: 1e-10,
        }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = dt;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("t_end", self.t_end),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("sample_interval", self.sample_interval),
            ("equilibrium_eps", self.equilibrium_eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DynamicsError::InvalidSettings(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if self.sample_interval > self.t_end {
            return Err(DynamicsError::InvalidSettings(format!(
                "sample_interval {} exceeds t_end {}",
                self.sample_interval, self.t_end
            )));
        }
        Ok(())
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            initial_step: self.initial_step,
            max_step: self.max_step,
            min_step: 1e-14 * self.t_end,
        }
    }

    /// Sample times `0, Δ, 2Δ, ...` up to `t_end`, with `t_end` appended when
    /// it is not a multiple of `Δ`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_interval + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * self.sample_interval).collect();
        let last = *times.last().expect("at least t = 0");
        if self.t_end - last > 1e-9 * self.t_end {
            times.push(self.t_end);
        } else if let Some(l) = times.last_mut() {
            *l = self.t_end;
        }
        times
    }
}

/// Sampled solution with per-sample diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CommunityState>,
    /// Overall probability of correct evaluation at each sample.
    pub pc: Vec<f64>,
    /// Largest group-sum deviation at each sample.
    pub conservation_error: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            pc: Vec::with_capacity(n),
            conservation_error: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &CommunityState {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn final_pc(&self) -> f64 {
        *self.pc.last().expect("trajectory has at least one sample")
    }

    pub fn max_conservation_error(&self) -> f64 {
        self.conservation_error.iter().copied().fold(0.0, f64::max)
    }

    fn push(
        &mut self,
        t: f64,
        y: Vec<f64>,
        field: &VectorField<'_>,
        params: &ModelParams,
    ) -> Result<(), DynamicsError> {
        let state = CommunityState::from_flat(params.grid.len(), params.group_count(), y);
        let error = state.conservation_error(params);
        if error > CONSERVATION_TOLERANCE {
            return Err(DynamicsError::ConservationViolated { t, error });
        }
        self.pc.push(field.overall_pc(state.as_slice()));
        self.times.push(t);
        self.states.push(state);
        self.conservation_error.push(error);
        Ok(())
    }
}

fn underflow(u: dopri::Underflow) -> DynamicsError {
    DynamicsError::StepUnderflow {
        t: u.t,
        h: u.h,
        state: u.y,
    }
}

/// Integrates the model from `initial` to `settings.t_end`, sampling the
/// dense interpolant every `settings.sample_interval`.
pub fn integrate(
    initial: &CommunityState,
    params: &ModelParams,
    settings: &IntegratorSettings,
) -> Result<Trajectory, DynamicsError> {
    settings.validate()?;
    initial.validate(params)?;
    let field = VectorField::new(params);
    let times = settings.sample_times();
    let mut traj = Trajectory::with_capacity(times.len());
    traj.push(0.0, initial.as_slice().to_vec(), &field, params)?;

    let mut next = 1;
    let mut failure = None;
    let mut solver = Dopri5::new(field.dim(), settings.step_control());
    solver
        .integrate(
            |_, y, dy| field.eval(y, dy),
            0.0,
            initial.as_slice(),
            settings.t_end,
            |step| {
                while next < times.len() && times[next] <= step.t_new {
                    let t = times[next];
                    let y = if t == step.t_new {
                        step.y_new.to_vec()
                    } else {
                        let mut buf = vec![0.0; step.y_new.len()];
                        step.interpolate(t, &mut buf);
                        buf
                    };
                    if let Err(e) = traj.push(t, y, &field, params) {
                        failure = Some(e);
                        return ControlFlow::Break(());
                    }
                    next += 1;
                }
                ControlFlow::Continue(())
            },
        )
        .map_err(underflow)?;
    if let Some(e) = failure {
        return Err(e);
    }
    debug_assert_eq!(traj.len(), times.len());
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: CommunityState,
    /// Whether the field's sup-norm fell below `equilibrium_eps`.
    pub converged: bool,
    pub t_reached: f64,
    pub residual: f64,
    pub pc: f64,
}

/// Integrates until the field's sup-norm drops below
/// `settings.equilibrium_eps` or `settings.t_end` is reached.
pub fn steady_state(
    initial: &CommunityState,
    params: &ModelParams,
    settings: &IntegratorSettings,
) -> Result<SteadyState, DynamicsError> {
    settings.validate()?;
    initial.validate(params)?;
    let field = VectorField::new(params);
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    let residual0 = field.residual(initial.as_slice());
    let (t, y, residual) = if residual0 < settings.equilibrium_eps {
        (0.0, initial.as_slice().to_vec(), residual0)
    } else {
        let mut residual = residual0;
        let mut solver = Dopri5::new(field.dim(), settings.step_control());
        let (t, y) = solver
            .integrate(
                |_, y, dy| field.eval(y, dy),
                0.0,
                initial.as_slice(),
                settings.t_end,
                |step| {
                    residual = sup(step.dy_new);
                    if residual < settings.equilibrium_eps {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                },
            )
            .map_err(underflow)?;
        (t, y, residual)
    };
    let state = CommunityState::from_flat(params.grid.len(), params.group_count(), y);
    let error = state.conservation_error(params);
    if error > CONSERVATION_TOLERANCE {
        return Err(DynamicsError::ConservationViolated { t, error });
    }
    Ok(SteadyState {
        pc: field.overall_pc(state.as_slice()),
        converged: residual < settings.equilibrium_eps,
        t_reached: t,
        residual,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BehaviorParams, Group};

    #[test]
    fn sample_times_cover_horizon() {
        let s = IntegratorSettings::new(10.0).with_sample_interval(3.0);
        assert_eq!(s.sample_times(), vec![0.0, 3.0, 6.0, 9.0, 10.0]);
        let s = IntegratorSettings::new(100.0);
        let t = s.sample_times();
        assert_eq!(t.len(), 101);
        assert_eq!(*t.last().unwrap(), 100.0);
    }

    #[test]
    fn settings_rejected() {
        let mut s = IntegratorSettings::new(10.0);
        s.abs_tol = 0.0;
        assert!(s.validate().is_err());
        let s = IntegratorSettings::new(1.0).with_sample_interval(2.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn invalid_initial_rejected() {
        let p = ModelParams::no_clique(2, 0.0, 0.0).unwrap();
        let s = CommunityState::from_groups(&[&[0.5, 0.0, 0.0]]);
        assert!(matches!(
            integrate(&s, &p, &IntegratorSettings::new(1.0)),
            Err(DynamicsError::InvalidInitial(_))
        ));
    }

    #[test]
    fn equilibrium_stays_put() {
        let p = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        let mut s = CommunityState::zeros(&p);
        s.group_mut(Group::Regular)[0] = 0.3;
        s.group_mut(Group::Regular)[10] = 0.7;
        let traj = integrate(&s, &p, &IntegratorSettings::new(100.0)).unwrap();
        for st in &traj.states {
            assert!(st.max_abs_diff(&s) <= 1e-7);
        }
    }

    #[test]
    fn fig3_run_goes_bimodal() {
        let p = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        let s = CommunityState::point_masses(&p, &[6]).unwrap();
        let traj = integrate(&s, &p, &IntegratorSettings::new(100.0)).unwrap();
        let r = traj.final_state().regular();
        assert!(traj.final_pc() >= 0.999);
        assert!(r[0] + r[10] >= 0.999);
        assert!(traj.max_conservation_error() <= 1e-9);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn steady_state_at_equilibrium_is_immediate() {
        let p = ModelParams::one_clique(10, BehaviorParams::default(), 0.2, 0.01, 0.5).unwrap();
        let mut s = CommunityState::zeros(&p);
        s.group_mut(Group::Regular)[10] = 0.8;
        s.group_mut(Group::Clique)[0] = 0.2;
        let ss = steady_state(&s, &p, &IntegratorSettings::new(100.0)).unwrap();
        assert!(ss.converged);
        assert_eq!(ss.t_reached, 0.0);
        assert_eq!(ss.pc, 1.0);
    }
}
