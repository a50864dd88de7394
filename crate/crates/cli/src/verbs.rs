//! Which library law checks each verb runs.

pub struct VerbSpec {
    pub verb: &'static str,
    pub checks: &'static [&'static str],
}

pub const VERBS: &[VerbSpec] = &[
    VerbSpec { verb: "wasserstein", checks: &["ot::check_optimization_complete"] },
    VerbSpec { verb: "compose", checks: &["prob::bayes_check", "prob::cost_triangle_check"] },
    VerbSpec {
        verb: "push",
        checks: &["lift::check_pushforward_conditional", "lift::check_pushforward_functor", "lift::check_pushforward_embedding"],
    },
    VerbSpec { verb: "lift", checks: &["lift::LiftedCoupling::check_invariants"] },
    VerbSpec {
        verb: "verify",
        checks: &["lift::check_lift_delta_laws", "lift::check_weight_preservation", "lift::check_lens_functoriality"],
    },
    VerbSpec {
        verb: "lens-check",
        checks: &["lens::check_lens_laws", "lens::check_lens_laws_pq", "lens::check_metric_lens", "lens::check_submetry"],
    },
    VerbSpec {
        verb: "opt",
        checks: &[
            "wcat::check_weighted_category",
            "wcat::check_optimization_complete",
            "wcat::check_pq_metric",
            "wcat::check_normed",
            "wcat::classify_pair",
            "wcat::check_dagger",
            "wcat::check_weighted_functor",
            "wcat::check_embedding",
        ],
    },
];

pub fn runs(verb: &str, check: &str) -> bool {
    VERBS.iter().any(|v| v.verb == verb && v.checks.contains(&check))
}
