use proptest::prelude::*;
use repcomm::analysis;
use repcomm::model::{self, majority_prob, rhs, snapshot};
use repcomm::{BehaviorParams, CommunityState, Group, ModelParams, Variant};

const L: usize = 6;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0usize..3,
        -1.0..=1.0f64,
        -1.0..=1.0f64,
        0.0..0.45f64,
        0.0..0.45f64,
        0.0..=0.5f64,
        0.0..=1.0f64,
    )
        .prop_map(|(v, alpha, sigma, f_cl, f_acl, p_lambda, gamma)| {
            let b = BehaviorParams::new(alpha, sigma).unwrap();
            match Variant::ALL[v] {
                Variant::NoClique => ModelParams::no_clique(L, alpha, sigma).unwrap(),
                Variant::OneClique => ModelParams::one_clique(L, b, f_cl, p_lambda, gamma).unwrap(),
                Variant::TwoCliques => {
                    ModelParams::two_cliques(L, b, f_cl, f_acl, p_lambda, gamma).unwrap()
                }
            }
        })
}

/// Random state from raw weights: each group's block is rescaled to its
/// share, and weights below `zero_below` become exact zeros.
fn state_from(params: &ModelParams, weights: &[f64], zero_below: f64) -> CommunityState {
    let mut s = CommunityState::zeros(params);
    let levels = params.grid.len();
    for &g in params.variant.groups() {
        let raw: Vec<f64> = weights[g.index() * levels..(g.index() + 1) * levels]
            .iter()
            .map(|&w| if w < zero_below { 0.0 } else { w })
            .collect();
        let total: f64 = raw.iter().sum();
        let share = params.group_fraction(g);
        let block = s.group_mut(g);
        if total == 0.0 {
            block[0] = share;
        } else {
            for (x, w) in block.iter_mut().zip(&raw) {
                *x = share * w / total;
            }
        }
    }
    s
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 3 * (L + 1))
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

proptest! {
    #[test]
    fn group_derivatives_sum_to_zero(params in params_strategy(), w in weights()) {
        let s = state_from(&params, &w, 0.0);
        let d = rhs(&s, &params);
        for &g in params.variant.groups() {
            prop_assert!(d.group_sum(g).abs() <= 1e-12, "{g}: {}", d.group_sum(g));
        }
    }

    #[test]
    fn empty_levels_do_not_lose_mass(params in params_strategy(), w in weights()) {
        let s = state_from(&params, &w, 0.4);
        let d = rhs(&s, &params);
        for &g in params.variant.groups() {
            for (k, (&m, &dm)) in s.group(g).iter().zip(d.group(g)).enumerate() {
                if m == 0.0 {
                    prop_assert!(dm >= 0.0, "{g} level {k}: {dm}");
                }
            }
        }
    }

    #[test]
    fn probabilities_in_unit_interval(params in params_strategy(), w in weights()) {
        let s = state_from(&params, &w, 0.2);
        let snap = snapshot(&s, &params);
        for &g in Group::ALL.iter() {
            prop_assert!(snap.selection.group(g).iter().all(|&x| in_unit(x)));
            if let Some(e) = snap.eval.group(g) {
                prop_assert!(e.iter().all(|&x| in_unit(x)), "{e:?}");
            }
        }
        let c = &snap.categories;
        for arr in [&c.p_c_ind, &c.p_m_ind, &c.p_c, &c.p_m, &c.prob_doc] {
            prop_assert!(arr.iter().all(|&x| in_unit(x)), "{arr:?}");
        }
        prop_assert!(in_unit(snap.overall_pc()));
        prop_assert!((c.prob_doc.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_clique_matches_no_clique(
        alpha in -1.0..=1.0f64,
        sigma in -1.0..=1.0f64,
        p_lambda in 0.0..=0.5f64,
        gamma in 0.0..=1.0f64,
        w in weights(),
    ) {
        let b = BehaviorParams::new(alpha, sigma).unwrap();
        let none = ModelParams::no_clique(L, alpha, sigma).unwrap();
        let one = ModelParams::one_clique(L, b, 0.0, p_lambda, gamma).unwrap();
        let s0 = state_from(&none, &w, 0.1);
        let mut s1 = CommunityState::zeros(&one);
        s1.group_mut(Group::Regular).copy_from_slice(s0.regular());
        let (d0, d1) = (rhs(&s0, &none), rhs(&s1, &one));
        for (a, b) in d0.regular().iter().zip(d1.regular()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
        prop_assert!(d1.clique().iter().all(|&x| x == 0.0));
        prop_assert!((model::overall_pc(&s0, &none) - model::overall_pc(&s1, &one)).abs() <= 1e-14);
    }

    #[test]
    fn empty_anticlique_matches_one_clique(
        f_cl in 0.0..0.9f64,
        p_lambda in 0.0..=0.5f64,
        gamma in 0.0..=1.0f64,
        w in weights(),
    ) {
        let b = BehaviorParams::new(0.3, -0.6).unwrap();
        let one = ModelParams::one_clique(L, b, f_cl, p_lambda, gamma).unwrap();
        let two = ModelParams::two_cliques(L, b, f_cl, 0.0, p_lambda, gamma).unwrap();
        let s1 = state_from(&one, &w, 0.1);
        let mut s2 = CommunityState::zeros(&two);
        for g in [Group::Regular, Group::Clique] {
            s2.group_mut(g).copy_from_slice(s1.group(g));
        }
        let (d1, d2) = (rhs(&s1, &one), rhs(&s2, &two));
        for g in [Group::Regular, Group::Clique] {
            for (a, b) in d1.group(g).iter().zip(d2.group(g)) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
        prop_assert!((model::overall_pc(&s1, &one) - model::overall_pc(&s2, &two)).abs() <= 1e-14);
    }

    #[test]
    fn majority_sharpens(p in 0.0..=1.0f64) {
        let m = majority_prob(p).unwrap();
        prop_assert!(in_unit(m));
        if p > 0.5 && p < 1.0 {
            prop_assert!(m > p);
        } else if p > 0.0 && p < 0.5 {
            prop_assert!(m < p);
        }
    }

    #[test]
    fn reduced_field_is_projection(r0 in 0.0..=1.0f64, u in 0.0..=1.0f64, alpha in -1.0..=1.0f64, sigma in -1.0..=1.0f64) {
        let r2 = (1.0 - r0) * u;
        let params = ModelParams::no_clique(2, alpha, sigma).unwrap();
        let (d0, d2) = analysis::reduced3_rhs(r0, r2, &params).unwrap();
        let full = rhs(&CommunityState::from_groups(&[&[r0, 1.0 - r0 - r2, r2]]), &params);
        prop_assert!((d0 - full.regular()[0]).abs() <= 1e-14);
        prop_assert!((d2 - full.regular()[2]).abs() <= 1e-14);
    }
}

#[test]
fn majority_fixed_points() {
    for p in [0.0, 0.5, 1.0] {
        assert_eq!(majority_prob(p).unwrap(), p);
    }
    let n = 100_000;
    let fixed: Vec<f64> = (0..=n)
        .map(|i| i as f64 / n as f64)
        .filter(|&p| majority_prob(p).unwrap() == p)
        .collect();
    assert_eq!(fixed, vec![0.0, 0.5, 1.0]);
    assert!(majority_prob(1.5).is_err());
}

#[test]
fn reduced_field_on_hundred_simplex_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let params = ModelParams::no_clique(2, 1.0, -1.0).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        let (r0, r2) = if a + b <= 1.0 {
            (a, b)
        } else {
            (1.0 - a, 1.0 - b)
        };
        let (d0, d2) = analysis::reduced3_rhs(r0, r2, &params).unwrap();
        let full = rhs(
            &CommunityState::from_groups(&[&[r0, 1.0 - r0 - r2, r2]]),
            &params,
        );
        worst = worst
            .max((d0 - full.regular()[0]).abs())
            .max((d2 - full.regular()[2]).abs());
    }
    assert!(worst <= 1e-14, "{worst}");
}
