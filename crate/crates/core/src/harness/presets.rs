//! Built-in configurations for the published figures and a few reference
//! points. Each preset is ordinary configuration text.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Scenario,
    Sweep,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub description: &'static str,
    pub text: &'static str,
}

const CATALOG: &[Preset] = &[
    Preset {
        name: "fig2a",
        kind: PresetKind::Field,
        description: "three-level field, neutral behaviour",
        text: "name = fig2a\nvariant = no-clique\nL = 2\nalpha = 0\nsigma = 0\nfield_n = 21\n",
    },
    Preset {
        name: "fig2b",
        kind: PresetKind::Field,
        description: "three-level field, alpha = 1, sigma = -1",
        text: "name = fig2b\nvariant = no-clique\nL = 2\nalpha = 1\nsigma = -1\nfield_n = 21\n",
    },
    Preset {
        name: "fig3",
        kind: PresetKind::Scenario,
        description: "eleven levels, neutral behaviour, start at 0.6",
        text: "name = fig3\nvariant = no-clique\nL = 10\nalpha = 0\nsigma = 0\nt_end = 100\n",
    },
    Preset {
        name: "fig4",
        kind: PresetKind::Scenario,
        description: "eleven levels, alpha = 1, sigma = -1, start at 0.6",
        text: "name = fig4\nvariant = no-clique\nL = 10\nalpha = 1\nsigma = -1\nt_end = 100\n",
    },
    Preset {
        name: "fig4-bistable",
        kind: PresetKind::Scenario,
        description: "as fig4 but starting at 0.7",
        text: "name = fig4-bistable\nvariant = no-clique\nL = 10\nalpha = 1\nsigma = -1\n\
               init_level = 7\nt_end = 200\n",
    },
    Preset {
        name: "fig5",
        kind: PresetKind::Sweep,
        description: "final p_c over alpha x sigma, 21 x 21",
        text: "name = fig5\nvariant = no-clique\nL = 10\nt_end = 100\n\
               axis1 = alpha -1 1 21\naxis2 = sigma -1 1 21\nmetric = final_pc\n",
    },
    Preset {
        name: "fig6",
        kind: PresetKind::Sweep,
        description: "one clique: final p_c over f_cl x gamma, p_lambda = 0.01",
        text: "name = fig6\nvariant = one-clique\nL = 10\np_lambda = 0.01\nt_end = 200\n\
               axis1 = f_cl 0 1 21\naxis2 = gamma 0 1 21\nmetric = final_pc\n",
    },
    Preset {
        name: "fig7",
        kind: PresetKind::Sweep,
        description: "one clique: final p_c over f_cl x p_lambda, gamma = 0.5",
        text: "name = fig7\nvariant = one-clique\nL = 10\ngamma = 0.5\nt_end = 200\n\
               axis1 = f_cl 0 1 21\naxis2 = p_lambda 0 0.5 21\nmetric = final_pc\n",
    },
    Preset {
        name: "fig8",
        kind: PresetKind::Sweep,
        description: "two equal cliques: final p_c over f_cl x gamma, p_lambda = 0.01",
        text: "name = fig8\nvariant = two-cliques\nL = 10\nf_acl = f_cl\np_lambda = 0.01\nt_end = 200\n\
               axis1 = f_cl 0 0.5 21\naxis2 = gamma 0 1 21\nmetric = final_pc\n",
    },
    Preset {
        name: "dim-l5",
        kind: PresetKind::Scenario,
        description: "six levels, alpha = 1, sigma = -1, start at 0.6",
        text: "name = dim-l5\nvariant = no-clique\nL = 5\nalpha = 1\nsigma = -1\nt_end = 200\n",
    },
    Preset {
        name: "dim-l20-06",
        kind: PresetKind::Scenario,
        description: "21 levels, alpha = 1, sigma = -1, start at 0.6",
        text: "name = dim-l20-06\nvariant = no-clique\nL = 20\nalpha = 1\nsigma = -1\nt_end = 200\n",
    },
    Preset {
        name: "dim-l20-07",
        kind: PresetKind::Scenario,
        description: "21 levels, alpha = 1, sigma = -1, start at 0.7",
        text: "name = dim-l20-07\nvariant = no-clique\nL = 20\nalpha = 1\nsigma = -1\n\
               init_level = 14\nt_end = 200\n",
    },
    Preset {
        name: "clique-only",
        kind: PresetKind::Scenario,
        description: "community made entirely of one clique, gamma = 0.5",
        text: "name = clique-only\nvariant = one-clique\nL = 10\nf_cl = 1\ngamma = 0.5\nt_end = 200\n",
    },
    Preset {
        name: "point-b",
        kind: PresetKind::Scenario,
        description: "two cliques of 0.3 each, gamma = 1",
        text: "name = point-b\nvariant = two-cliques\nL = 10\nf_cl = 0.3\nf_acl = f_cl\n\
               p_lambda = 0.01\ngamma = 1\nt_end = 200\n",
    },
    Preset {
        name: "oracle-fig3",
        kind: PresetKind::Scenario,
        description: "fig3 setting with an 8000-agent simulation alongside",
        text: "name = oracle-fig3\nvariant = no-clique\nL = 10\nt_end = 20\n\
               oracle_n = 8000\noracle_dt = 0.05\noracle_seed = 1\n",
    },
];

pub fn catalog() -> &'static [Preset] {
    CATALOG
}

pub fn find(name: &str) -> Option<&'static Preset> {
    CATALOG.iter().find(|p| p.name == name)
}
