use super::ModelError;

/// Uniformly spaced reputation levels `0, 1/L, ..., 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReputationGrid {
    levels: Vec<f64>,
}

impl ReputationGrid {
    pub fn new(steps: usize) -> Result<Self, ModelError> {
        if steps == 0 {
            return Err(ModelError::InvalidGrid);
        }
        let levels = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        Ok(Self { levels })
    }

    /// Number of steps `L`; the grid has `L + 1` levels.
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.steps() as f64
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> f64 {
        self.levels[k]
    }

    /// Index of the grid level closest to `r`.
    pub fn nearest_index(&self, r: f64) -> usize {
        let k = (r.clamp(0.0, 1.0) * self.steps() as f64).round();
        k as usize
    }
}

/// Builds the grid with `steps` uniform steps.
pub fn make_grid(steps: usize) -> Result<ReputationGrid, ModelError> {
    ReputationGrid::new(steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_level_grid() {
        let g = make_grid(2).unwrap();
        assert_eq!(g.levels(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn eleven_level_grid() {
        let g = make_grid(10).unwrap();
        assert_eq!(g.len(), 11);
        for (k, r) in g.levels().iter().enumerate() {
            assert!((r - 0.1 * k as f64).abs() < 1e-15);
        }
        assert_eq!(g.levels()[10], 1.0);
        assert!((g.spacing() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn single_step_grid_is_endpoints() {
        assert_eq!(make_grid(1).unwrap().levels(), &[0.0, 1.0]);
    }

    #[test]
    fn zero_steps_rejected() {
        assert_eq!(make_grid(0), Err(ModelError::InvalidGrid));
    }

    #[test]
    fn strictly_increasing() {
        let g = make_grid(37).unwrap();
        assert!(g.levels().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.nearest_index(0.6), 22);
    }
}
