use super::{Group, ModelError, ModelParams};

/// Tolerance on the group sums of a valid state.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Proportions of members per reputation level, one block of `L + 1` entries
/// per group (regular, then clique, then anti-clique).
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityState {
    levels: usize,
    groups: usize,
    data: Vec<f64>,
}

impl CommunityState {
    /// All-zero state shaped for `params`.
    pub fn zeros(params: &ModelParams) -> Self {
        let levels = params.grid.len();
        let groups = params.group_count();
        Self {
            levels,
            groups,
            data: vec![0.0; levels * groups],
        }
    }

    /// Wraps a flat vector laid out group-major. Panics if the length does not
    /// match `groups * levels`.
    pub fn from_flat(levels: usize, groups: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), levels * groups, "state length mismatch");
        Self {
            levels,
            groups,
            data,
        }
    }

    pub fn from_groups(blocks: &[&[f64]]) -> Self {
        let levels = blocks.first().map_or(0, |b| b.len());
        assert!(
            blocks.iter().all(|b| b.len() == levels),
            "ragged group blocks"
        );
        let data = blocks.iter().flat_map(|b| b.iter().copied()).collect();
        Self {
            levels,
            groups: blocks.len(),
            data,
        }
    }

    /// Each group's whole share at level `level[g]`.
    pub fn point_masses(params: &ModelParams, level: &[usize]) -> Result<Self, ModelError> {
        let mut s = Self::zeros(params);
        for &g in params.variant.groups() {
            let k = level.get(g.index()).copied().unwrap_or(level[0]);
            if k > params.steps() {
                return Err(ModelError::InvalidState(format!(
                    "level {k} outside grid 0..={}",
                    params.steps()
                )));
            }
            s.group_mut(g)[k] = params.group_fraction(g);
        }
        Ok(s)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Block for `group`; empty when the group is absent.
    pub fn group(&self, group: Group) -> &[f64] {
        let g = group.index();
        if g >= self.groups {
            return &[];
        }
        &self.data[g * self.levels..(g + 1) * self.levels]
    }

    pub fn group_mut(&mut self, group: Group) -> &mut [f64] {
        let g = group.index();
        assert!(g < self.groups, "group {group} absent from state");
        &mut self.data[g * self.levels..(g + 1) * self.levels]
    }

    pub fn regular(&self) -> &[f64] {
        self.group(Group::Regular)
    }

    pub fn clique(&self) -> &[f64] {
        self.group(Group::Clique)
    }

    pub fn anticlique(&self) -> &[f64] {
        self.group(Group::AntiClique)
    }

    pub fn group_sum(&self, group: Group) -> f64 {
        self.group(group).iter().sum()
    }

    /// Largest deviation of a group sum from its configured share.
    pub fn conservation_error(&self, params: &ModelParams) -> f64 {
        params
            .variant
            .groups()
            .iter()
            .map(|&g| (self.group_sum(g) - params.group_fraction(g)).abs())
            .fold(0.0, f64::max)
    }

    /// Checks shape, entry range and group sums against `params`.
    pub fn validate(&self, params: &ModelParams) -> Result<(), ModelError> {
        if self.levels != params.grid.len() || self.groups != params.group_count() {
            return Err(ModelError::InvalidState(format!(
                "shape {}x{} does not match {} with {} levels",
                self.groups,
                self.levels,
                params.variant,
                params.grid.len()
            )));
        }
        if let Some((i, v)) = self
            .data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ModelError::InvalidState(format!(
                "entry {i} = {v} outside [0, 1]"
            )));
        }
        for &g in params.variant.groups() {
            let sum = self.group_sum(g);
            let want = params.group_fraction(g);
            if (sum - want).abs() > MASS_TOLERANCE {
                return Err(ModelError::InvalidState(format!(
                    "{g} mass {sum} differs from its share {want}"
                )));
            }
        }
        Ok(())
    }

    /// Sup-norm distance to `other`.
    pub fn max_abs_diff(&self, other: &CommunityState) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Total-variation distance `½ Σ |x - y|` over all entries.
    pub fn total_variation(&self, other: &CommunityState) -> f64 {
        0.5 * self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BehaviorParams;

    #[test]
    fn point_masses_respect_shares() {
        let p =
            ModelParams::two_cliques(10, BehaviorParams::default(), 0.3, 0.3, 0.01, 1.0).unwrap();
        let s = CommunityState::point_masses(&p, &[6, 6, 6]).unwrap();
        assert!((s.regular()[6] - 0.4).abs() < 1e-15);
        assert_eq!(s.clique()[6], 0.3);
        assert_eq!(s.anticlique()[6], 0.3);
        s.validate(&p).unwrap();
    }

    #[test]
    fn validate_rejects_bad_mass() {
        let p = ModelParams::no_clique(2, 0.0, 0.0).unwrap();
        let s = CommunityState::from_groups(&[&[0.5, 0.2, 0.2]]);
        assert!(s.validate(&p).is_err());
        let s = CommunityState::from_groups(&[&[-0.1, 0.6, 0.5]]);
        assert!(s.validate(&p).is_err());
        let s = CommunityState::from_groups(&[&[0.5, 0.5]]);
        assert!(s.validate(&p).is_err());
    }

    #[test]
    fn absent_group_is_empty() {
        let p = ModelParams::no_clique(4, 0.0, 0.0).unwrap();
        let s = CommunityState::zeros(&p);
        assert!(s.clique().is_empty());
        assert_eq!(s.group_sum(Group::AntiClique), 0.0);
    }
}
