use std::fmt;
use std::str::FromStr;

use super::{ModelError, ReputationGrid};

/// Which member groups exist in the community.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    NoClique,
    OneClique,
    TwoCliques,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::NoClique, Variant::OneClique, Variant::TwoCliques];

    /// Number of member groups carried in the state vector.
    pub fn group_count(self) -> usize {
        match self {
            Variant::NoClique => 1,
            Variant::OneClique => 2,
            Variant::TwoCliques => 3,
        }
    }

    pub fn groups(self) -> &'static [Group] {
        &Group::ALL[..self.group_count()]
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::NoClique => "no-clique",
            Variant::OneClique => "one-clique",
            Variant::TwoCliques => "two-cliques",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-clique" | "none" => Ok(Variant::NoClique),
            "one-clique" | "clique" => Ok(Variant::OneClique),
            "two-cliques" | "two-clique" | "antagonistic" => Ok(Variant::TwoCliques),
            other => Err(ModelError::UnknownName(other.to_string())),
        }
    }
}

/// Member group. The discriminant is the group's block index in the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Regular = 0,
    Clique = 1,
    AntiClique = 2,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Regular, Group::Clique, Group::AntiClique];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::Regular => "regular",
            Group::Clique => "clique",
            Group::AntiClique => "anticlique",
        }
    }

    /// Column prefix used in CSV output (`R`, `Q`, `U`).
    pub fn symbol(self) -> char {
        match self {
            Group::Regular => 'R',
            Group::Clique => 'Q',
            Group::AntiClique => 'U',
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regular" | "R" | "reg" => Ok(Group::Regular),
            "clique" | "Q" | "cl" => Ok(Group::Clique),
            "anticlique" | "anti-clique" | "U" | "acl" => Ok(Group::AntiClique),
            other => Err(ModelError::UnknownName(other.to_string())),
        }
    }
}

/// Curvatures of the authenticity `a(r)` and evaluation-skill `c(r)` curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviorParams {
    pub alpha: f64,
    pub sigma: f64,
}

impl BehaviorParams {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self, ModelError> {
        check_range("alpha", alpha, -1.0, 1.0)?;
        check_range("sigma", sigma, -1.0, 1.0)?;
        Ok(Self { alpha, sigma })
    }

    /// Probability that a member at reputation `r` submits an authentic document.
    pub fn authenticity(&self, r: f64) -> f64 {
        quadratic_behavior(r, self.alpha)
    }

    /// Probability that a member at reputation `r` evaluates a document correctly.
    pub fn correctness(&self, r: f64) -> f64 {
        quadratic_behavior(r, self.sigma)
    }
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliqueParams {
    /// Fraction of clique members.
    pub f_cl: f64,
    /// Fraction of anti-clique members.
    pub f_acl: f64,
    /// Share of regular documents on each of the two agenda topics.
    pub p_lambda: f64,
    /// Attenuation of clique members' authenticity.
    pub gamma: f64,
}

impl CliqueParams {
    pub fn new(f_cl: f64, f_acl: f64, p_lambda: f64, gamma: f64) -> Result<Self, ModelError> {
        check_range("f_cl", f_cl, 0.0, 1.0)?;
        check_range("f_acl", f_acl, 0.0, 1.0)?;
        check_range("p_lambda", p_lambda, 0.0, 0.5)?;
        check_range("gamma", gamma, 0.0, 1.0)?;
        if f_cl + f_acl > 1.0 + 1e-12 {
            return Err(ModelError::Inconsistent(format!(
                "f_cl + f_acl = {} exceeds 1",
                f_cl + f_acl
            )));
        }
        Ok(Self {
            f_cl,
            f_acl,
            p_lambda,
            gamma,
        })
    }

    /// No cliques at all.
    pub fn none() -> Self {
        Self {
            f_cl: 0.0,
            f_acl: 0.0,
            p_lambda: 0.0,
            gamma: 1.0,
        }
    }
}

impl Default for CliqueParams {
    fn default() -> Self {
        Self::none()
    }
}

/// Everything needed to evaluate the vector field of one model variant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub variant: Variant,
    pub grid: ReputationGrid,
    pub behavior: BehaviorParams,
    pub clique: CliqueParams,
}

impl ModelParams {
    pub fn new(
        variant: Variant,
        grid: ReputationGrid,
        behavior: BehaviorParams,
        clique: CliqueParams,
    ) -> Result<Self, ModelError> {
        // Re-run the range checks in case the structs were built literally.
        BehaviorParams::new(behavior.alpha, behavior.sigma)?;
        CliqueParams::new(clique.f_cl, clique.f_acl, clique.p_lambda, clique.gamma)?;
        match variant {
            Variant::NoClique if clique.f_cl != 0.0 || clique.f_acl != 0.0 => {
                return Err(ModelError::Inconsistent(
                    "the no-clique variant requires f_cl = f_acl = 0".into(),
                ))
            }
            Variant::OneClique if clique.f_acl != 0.0 => {
                return Err(ModelError::Inconsistent(
                    "the one-clique variant requires f_acl = 0".into(),
                ))
            }
            _ => {}
        }
        Ok(Self {
            variant,
            grid,
            behavior,
            clique,
        })
    }

    /// No-clique model on an `L`-step grid.
    pub fn no_clique(steps: usize, alpha: f64, sigma: f64) -> Result<Self, ModelError> {
        Self::new(
            Variant::NoClique,
            ReputationGrid::new(steps)?,
            BehaviorParams::new(alpha, sigma)?,
            CliqueParams::none(),
        )
    }

    pub fn one_clique(
        steps: usize,
        behavior: BehaviorParams,
        f_cl: f64,
        p_lambda: f64,
        gamma: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            Variant::OneClique,
            ReputationGrid::new(steps)?,
            behavior,
            CliqueParams::new(f_cl, 0.0, p_lambda, gamma)?,
        )
    }

    pub fn two_cliques(
        steps: usize,
        behavior: BehaviorParams,
        f_cl: f64,
        f_acl: f64,
        p_lambda: f64,
        gamma: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            Variant::TwoCliques,
            ReputationGrid::new(steps)?,
            behavior,
            CliqueParams::new(f_cl, f_acl, p_lambda, gamma)?,
        )
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    pub fn group_count(&self) -> usize {
        self.variant.group_count()
    }

    /// Total population share of `group` (0 for groups absent from the variant).
    pub fn group_fraction(&self, group: Group) -> f64 {
        if group.index() >= self.group_count() {
            return 0.0;
        }
        match group {
            Group::Regular => 1.0 - self.clique.f_cl - self.clique.f_acl,
            Group::Clique => self.clique.f_cl,
            Group::AntiClique => self.clique.f_acl,
        }
    }

    /// Agenda-topic share of regular documents. The no-clique variant has no
    /// agenda, so every regular document is generic.
    pub fn effective_p_lambda(&self) -> f64 {
        match self.variant {
            Variant::NoClique => 0.0,
            _ => self.clique.p_lambda,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.clique.gamma
    }
}

/// `r (1 + k (1 - r))`, the only quadratic with value 0 at 0 and 1 at 1.
fn quadratic_behavior(r: f64, curvature: f64) -> f64 {
    r * (1.0 + curvature * (1.0 - r))
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), ModelError> {
    if !(lo..=hi).contains(&value) {
        return Err(ModelError::OutOfRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Probability that a member with reputation `r` submits an authentic document.
pub fn authenticity_prob(r: f64, alpha: f64) -> Result<f64, ModelError> {
    check_range("r", r, 0.0, 1.0)?;
    check_range("alpha", alpha, -1.0, 1.0)?;
    Ok(quadratic_behavior(r, alpha))
}

/// Probability that a member with reputation `r` evaluates a document correctly.
pub fn correctness_prob(r: f64, sigma: f64) -> Result<f64, ModelError> {
    check_range("r", r, 0.0, 1.0)?;
    check_range("sigma", sigma, -1.0, 1.0)?;
    Ok(quadratic_behavior(r, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn behavior_endpoints() {
        for alpha in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert_eq!(authenticity_prob(0.0, alpha).unwrap(), 0.0);
            assert_eq!(authenticity_prob(1.0, alpha).unwrap(), 1.0);
            assert_eq!(correctness_prob(0.0, alpha).unwrap(), 0.0);
            assert_eq!(correctness_prob(1.0, alpha).unwrap(), 1.0);
        }
    }

    #[test]
    fn behavior_hand_values() {
        assert!((authenticity_prob(0.5, 0.5).unwrap() - 0.625).abs() < 1e-15);
        assert!((correctness_prob(0.6, -1.0).unwrap() - 0.36).abs() < 1e-15);
    }

    #[test]
    fn behavior_rejects_out_of_range() {
        assert!(authenticity_prob(1.1, 0.0).is_err());
        assert!(authenticity_prob(0.5, -1.5).is_err());
        assert!(correctness_prob(-0.1, 0.0).is_err());
        assert!(correctness_prob(0.5, 2.0).is_err());
        assert!(BehaviorParams::new(2.0, 0.0).is_err());
    }

    #[test]
    fn clique_constraints() {
        assert!(CliqueParams::new(0.6, 0.5, 0.1, 1.0).is_err());
        assert!(CliqueParams::new(0.3, 0.3, 0.6, 1.0).is_err());
        assert!(CliqueParams::new(0.3, 0.3, 0.5, 1.0).is_ok());
    }

    #[test]
    fn variant_consistency() {
        let grid = ReputationGrid::new(10).unwrap();
        let b = BehaviorParams::default();
        let with_clique = CliqueParams::new(0.2, 0.0, 0.01, 0.5).unwrap();
        assert!(ModelParams::new(Variant::NoClique, grid.clone(), b, with_clique).is_err());
        let with_anti = CliqueParams::new(0.2, 0.1, 0.01, 0.5).unwrap();
        assert!(ModelParams::new(Variant::OneClique, grid.clone(), b, with_anti).is_err());
        assert!(ModelParams::new(Variant::TwoCliques, grid, b, with_anti).is_ok());
    }

    #[test]
    fn group_fractions() {
        let p =
            ModelParams::two_cliques(10, BehaviorParams::default(), 0.3, 0.2, 0.01, 1.0).unwrap();
        assert!((p.group_fraction(Group::Regular) - 0.5).abs() < 1e-15);
        assert_eq!(p.group_fraction(Group::Clique), 0.3);
        assert_eq!(p.group_fraction(Group::AntiClique), 0.2);
        let q = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
        assert_eq!(q.group_fraction(Group::Clique), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        for g in Group::ALL {
            assert_eq!(g.name().parse::<Group>().unwrap(), g);
        }
    }
}
