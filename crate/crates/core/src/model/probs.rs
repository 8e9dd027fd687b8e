//! Selection, evaluation and correctness probabilities.
//!
//! Every formula is written once against the per-category correctness table
//! of the evaluating groups; the no-clique and one-clique variants fall out
//! as the cases with empty clique blocks.

use super::{CommunityState, Group, ModelError, ModelParams, Variant};

/// Topic of a document relative to the clique agenda.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topic {
    Generic,
    Clique,
    AntiClique,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    Authentic,
    Fake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DocCategory {
    pub topic: Topic,
    pub truth: Truth,
}

impl DocCategory {
    pub const ALL: [DocCategory; 6] = [
        DocCategory::new(Topic::Generic, Truth::Authentic),
        DocCategory::new(Topic::Generic, Truth::Fake),
        DocCategory::new(Topic::Clique, Truth::Authentic),
        DocCategory::new(Topic::Clique, Truth::Fake),
        DocCategory::new(Topic::AntiClique, Truth::Authentic),
        DocCategory::new(Topic::AntiClique, Truth::Fake),
    ];

    pub const fn new(topic: Topic, truth: Truth) -> Self {
        Self { topic, truth }
    }

    /// Position in [`DocCategory::ALL`].
    pub const fn index(self) -> usize {
        let t = match self.topic {
            Topic::Generic => 0,
            Topic::Clique => 1,
            Topic::AntiClique => 2,
        };
        let f = match self.truth {
            Truth::Authentic => 0,
            Truth::Fake => 1,
        };
        2 * t + f
    }

    pub fn label(self) -> &'static str {
        ["g,A", "g,F", "q,A", "q,F", "qbar,A", "qbar,F"][self.index()]
    }
}

impl Topic {
    pub const ALL: [Topic; 3] = [Topic::Generic, Topic::Clique, Topic::AntiClique];

    pub fn authentic(self) -> DocCategory {
        DocCategory::new(self, Truth::Authentic)
    }

    pub fn fake(self) -> DocCategory {
        DocCategory::new(self, Truth::Fake)
    }
}

/// Probability that a member of an agenda group evaluates a document of
/// `category` correctly. Generic documents get a coin flip; agenda documents
/// are judged authentic when they support the group and fake otherwise.
/// Regular members are handled separately through `c(r)`.
pub fn agenda_correctness(group: Group, category: DocCategory) -> f64 {
    let supports = match (group, category.topic) {
        (Group::Regular, _) => panic!("regular members evaluate through c(r)"),
        (_, Topic::Generic) => return 0.5,
        (Group::Clique, Topic::Clique) | (Group::AntiClique, Topic::AntiClique) => true,
        _ => false,
    };
    // Judged authentic iff the document supports the group's agenda.
    match (supports, category.truth) {
        (true, Truth::Authentic) | (false, Truth::Fake) => 1.0,
        _ => 0.0,
    }
}

/// Probability that two or more of three independent evaluators, each right
/// with probability `p`, are right: `p³ + 3p²(1 − p) = p²(3 − 2p)`.
pub fn majority_prob(p: f64) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ModelError::OutOfRange {
            name: "p",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(majority(p))
}

#[inline]
pub(crate) fn majority(p: f64) -> f64 {
    p * p * (3.0 - 2.0 * p)
}

/// How raw state entries enter the probability formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Clip {
    /// Negative masses (integration noise) count as zero and probabilities
    /// are clamped to `[0, 1]`.
    Clamp,
    /// Formulas are evaluated on the raw entries. Used for finite-difference
    /// Jacobians, where clamping would put a kink at the boundary.
    Raw,
}

impl Clip {
    #[inline]
    fn mass(self, m: f64) -> f64 {
        match self {
            Clip::Clamp => m.max(0.0),
            Clip::Raw => m,
        }
    }

    #[inline]
    fn prob(self, p: f64) -> f64 {
        match self {
            Clip::Clamp => p.clamp(0.0, 1.0),
            Clip::Raw => p,
        }
    }
}

/// Probability of picking an evaluator from each (group, level) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProbs {
    pub per_group: Vec<Vec<f64>>,
    /// `Σ r_i (R_i + Q_i + U_i)`. When it is zero every selection probability is zero.
    pub denominator: f64,
}

impl SelectionProbs {
    pub fn group(&self, group: Group) -> &[f64] {
        self.per_group
            .get(group.index())
            .map_or(&[], |v| v.as_slice())
    }

    pub fn group_total(&self, group: Group) -> f64 {
        self.group(group).iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.per_group.iter().flatten().sum()
    }
}

/// Individual and majority correctness per document category, plus the
/// submission distribution over categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryProbs {
    /// Chance a randomly selected evaluator judges the category correctly.
    pub p_c_ind: [f64; 6],
    /// Chance a randomly selected evaluator judges the category wrongly.
    pub p_m_ind: [f64; 6],
    /// Majority (2 of 3) correct.
    pub p_c: [f64; 6],
    /// Majority (2 of 3) wrong.
    pub p_m: [f64; 6],
    /// Probability that a submitted document falls in the category.
    pub prob_doc: [f64; 6],
}

impl CategoryProbs {
    pub fn correct_ind(&self, c: DocCategory) -> f64 {
        self.p_c_ind[c.index()]
    }

    pub fn mistaken_ind(&self, c: DocCategory) -> f64 {
        self.p_m_ind[c.index()]
    }

    pub fn correct(&self, c: DocCategory) -> f64 {
        self.p_c[c.index()]
    }

    pub fn mistaken(&self, c: DocCategory) -> f64 {
        self.p_m[c.index()]
    }

    pub fn prob(&self, c: DocCategory) -> f64 {
        self.prob_doc[c.index()]
    }

    /// Probability that a submitted document is judged correctly.
    pub fn overall_correct(&self) -> f64 {
        Topic::ALL
            .iter()
            .map(|t| {
                let a = t.authentic();
                let f = t.fake();
                self.prob(a) * self.correct(a) + self.prob(f) * (1.0 - self.mistaken(f))
            })
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}

/// Per-level probability that a submitted document is judged authentic,
/// by author group.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalProbs {
    pub e_reg: Vec<f64>,
    pub e_cl: Option<Vec<f64>>,
    pub e_acl: Option<Vec<f64>>,
}

impl EvalProbs {
    pub fn group(&self, group: Group) -> Option<&[f64]> {
        match group {
            Group::Regular => Some(&self.e_reg),
            Group::Clique => self.e_cl.as_deref(),
            Group::AntiClique => self.e_acl.as_deref(),
        }
    }
}

/// Behavior curves sampled on the grid.
#[derive(Debug, Clone)]
pub(crate) struct LevelTables {
    pub r: Vec<f64>,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

impl LevelTables {
    pub fn new(params: &ModelParams) -> Self {
        let r = params.grid.levels().to_vec();
        let a = r.iter().map(|&x| params.behavior.authenticity(x)).collect();
        let c = r.iter().map(|&x| params.behavior.correctness(x)).collect();
        Self { r, a, c }
    }
}

pub(crate) fn selection_from_slice(
    data: &[f64],
    params: &ModelParams,
    tables: &LevelTables,
    clip: Clip,
) -> SelectionProbs {
    let n = tables.r.len();
    let groups = params.group_count();
    let mut per_group: Vec<Vec<f64>> = (0..groups)
        .map(|g| {
            data[g * n..(g + 1) * n]
                .iter()
                .zip(&tables.r)
                .map(|(&m, &r)| r * clip.mass(m))
                .collect()
        })
        .collect();
    let denominator: f64 = per_group.iter().flatten().sum();
    if denominator > 0.0 {
        for w in per_group.iter_mut().flatten() {
            *w /= denominator;
        }
    } else {
        // No one has positive reputation: no evaluator can be selected.
        for w in per_group.iter_mut().flatten() {
            *w = 0.0;
        }
    }
    SelectionProbs {
        per_group,
        denominator,
    }
}

pub(crate) fn categories_from_slice(
    data: &[f64],
    params: &ModelParams,
    tables: &LevelTables,
    selection: &SelectionProbs,
    clip: Clip,
) -> CategoryProbs {
    let n = tables.r.len();
    let s_reg = selection.group(Group::Regular);
    let reg_correct: f64 = s_reg.iter().zip(&tables.c).map(|(s, c)| s * c).sum();
    let reg_mistaken: f64 = s_reg
        .iter()
        .zip(&tables.c)
        .map(|(s, c)| s * (1.0 - c))
        .sum();
    let agenda_groups = &params.variant.groups()[1..];

    let mut p_c_ind = [0.0; 6];
    let mut p_m_ind = [0.0; 6];
    for cat in DocCategory::ALL {
        let mut right = reg_correct;
        let mut wrong = reg_mistaken;
        for &g in agenda_groups {
            let s = selection.group_total(g);
            let k = agenda_correctness(g, cat);
            right += s * k;
            wrong += s * (1.0 - k);
        }
        p_c_ind[cat.index()] = clip.prob(right);
        p_m_ind[cat.index()] = clip.prob(wrong);
    }
    let p_c = p_c_ind.map(majority);
    let p_m = p_m_ind.map(majority);

    let gamma = params.gamma();
    let group_sums = |g: Group| -> (f64, f64) {
        let block = &data[g.index() * n..(g.index() + 1) * n];
        let weight = if g == Group::Regular { 1.0 } else { gamma };
        block
            .iter()
            .zip(&tables.a)
            .fold((0.0, 0.0), |(au, fk), (&m, &a)| {
                let m = clip.mass(m);
                (au + m * weight * a, fk + m * (1.0 - weight * a))
            })
    };
    let (reg_a, reg_f) = group_sums(Group::Regular);
    let p_lambda = params.effective_p_lambda();
    let generic = 1.0 - 2.0 * p_lambda;
    let mut prob_doc = [
        generic * reg_a,
        generic * reg_f,
        p_lambda * reg_a,
        p_lambda * reg_f,
        p_lambda * reg_a,
        p_lambda * reg_f,
    ];
    for &g in agenda_groups {
        let (au, fk) = group_sums(g);
        let topic = if g == Group::Clique {
            Topic::Clique
        } else {
            Topic::AntiClique
        };
        prob_doc[topic.authentic().index()] += au;
        prob_doc[topic.fake().index()] += fk;
    }

    CategoryProbs {
        p_c_ind,
        p_m_ind,
        p_c,
        p_m,
        prob_doc,
    }
}

pub(crate) fn eval_from_categories(
    params: &ModelParams,
    tables: &LevelTables,
    cats: &CategoryProbs,
    clip: Clip,
) -> EvalProbs {
    let p_lambda = params.effective_p_lambda();
    let topic_weights = [1.0 - 2.0 * p_lambda, p_lambda, p_lambda];
    let e_reg = tables
        .a
        .iter()
        .map(|&a| {
            let e: f64 = Topic::ALL
                .iter()
                .zip(topic_weights)
                .map(|(t, w)| {
                    w * (a * cats.correct(t.authentic()) + (1.0 - a) * cats.mistaken(t.fake()))
                })
                .sum();
            clip.prob(e)
        })
        .collect();
    let gamma = params.gamma();
    let agenda = |topic: Topic| -> Vec<f64> {
        tables
            .a
            .iter()
            .map(|&a| {
                let ga = gamma * a;
                clip.prob(
                    ga * cats.correct(topic.authentic()) + (1.0 - ga) * cats.mistaken(topic.fake()),
                )
            })
            .collect()
    };
    let e_cl = (params.variant != Variant::NoClique).then(|| agenda(Topic::Clique));
    let e_acl = (params.variant == Variant::TwoCliques).then(|| agenda(Topic::AntiClique));
    EvalProbs { e_reg, e_cl, e_acl }
}

/// Everything derived from one state, computed in a single pass.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub selection: SelectionProbs,
    pub categories: CategoryProbs,
    pub eval: EvalProbs,
}

impl Snapshot {
    pub fn overall_pc(&self) -> f64 {
        self.categories.overall_correct()
    }
}

pub(crate) fn snapshot_from_slice(
    data: &[f64],
    params: &ModelParams,
    tables: &LevelTables,
    clip: Clip,
) -> Snapshot {
    let selection = selection_from_slice(data, params, tables, clip);
    let categories = categories_from_slice(data, params, tables, &selection, clip);
    let eval = eval_from_categories(params, tables, &categories, clip);
    Snapshot {
        selection,
        categories,
        eval,
    }
}

pub fn snapshot(state: &CommunityState, params: &ModelParams) -> Snapshot {
    snapshot_from_slice(
        state.as_slice(),
        params,
        &LevelTables::new(params),
        Clip::Clamp,
    )
}

/// Reputation-proportional evaluator selection probabilities.
pub fn selection_probs(state: &CommunityState, params: &ModelParams) -> SelectionProbs {
    selection_from_slice(
        state.as_slice(),
        params,
        &LevelTables::new(params),
        Clip::Clamp,
    )
}

pub fn category_probs(state: &CommunityState, params: &ModelParams) -> CategoryProbs {
    snapshot(state, params).categories
}

pub fn eval_probs(state: &CommunityState, params: &ModelParams) -> EvalProbs {
    snapshot(state, params).eval
}

/// Probability that a randomly submitted document is judged correctly.
pub fn overall_pc(state: &CommunityState, params: &ModelParams) -> f64 {
    snapshot(state, params).overall_pc()
}
