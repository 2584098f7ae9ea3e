use serde::Serialize;

use super::{
    a_chain, a_tree, ehp_b, exact_constant, level_profile, optimize_theta, Form, HardyError,
    HardyProblem, NormOptions, DEFAULT_THETA_MAX,
};
use crate::tree::Antichain;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeOptions {
    pub theta_max: f64,
    pub antichain_cap: usize,
    pub norm: NormOptions,
    /// Compute depth-truncation profiles and the `diverging` flag.
    pub level_profiles: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            theta_max: DEFAULT_THETA_MAX,
            antichain_cap: 1_000_000,
            norm: NormOptions::default(),
            level_profiles: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    pub p: f64,
    pub q: f64,
    pub vertices: usize,
    pub a_chain: f64,
    pub a_chain_argmax: usize,
    pub a_tree: f64,
    pub theta_star: f64,
    pub suff_bound: f64,
    pub b_ehp: Option<f64>,
    /// Best ratio found, a lower bound for B when enumeration was partial.
    pub b_lower_bound: f64,
    pub b_argmax: Antichain,
    pub antichains_evaluated: usize,
    pub c_exact: f64,
    pub c_dual: f64,
    pub c_upper: f64,
    pub maximizer: Vec<f64>,
    pub a_chain_profile: Vec<f64>,
    pub a_tree_profile: Vec<f64>,
    pub flags: Vec<String>,
    pub invariants: Vec<InvariantCheck>,
}

impl HardyReport {
    pub fn all_invariants_hold(&self) -> bool {
        self.invariants.iter().all(|c| c.ok)
    }
}

fn check(name: &str, ok: bool, detail: String) -> InvariantCheck {
    InvariantCheck {
        name: name.to_owned(),
        ok,
        detail,
    }
}

/// Computes every Hardy quantity for `problem` and checks their ordering.
pub fn analyze(problem: &HardyProblem, opts: &AnalyzeOptions) -> Result<HardyReport, HardyError> {
    let mut flags = Vec::new();
    let chain = a_chain(problem);
    let theta = optimize_theta(problem, opts.theta_max)?;
    let primal = exact_constant(problem, Form::Primal, &opts.norm)?;
    let dual = exact_constant(problem, Form::Dual, &opts.norm)?;

    let count = problem.tree().antichain_count();
    // Past the cap only a lower bound from a prefix of the enumeration exists.
    let ehp = ehp_b(problem, opts.antichain_cap)?;
    let b_ehp = if ehp.partial || count > opts.antichain_cap as u128 {
        flags.push("partial_B".to_owned());
        None
    } else {
        Some(ehp.b)
    };

    let (mut chain_profile, mut tree_profile) = (Vec::new(), Vec::new());
    if opts.level_profiles {
        let theta_star = theta.theta_star;
        let cp = level_profile(problem, |p| Ok(a_chain(p).value))?;
        let tp = level_profile(problem, |p| Ok(a_tree(p, theta_star)?.value))?;
        if cp.diverging || tp.diverging {
            flags.push("diverging".to_owned());
        }
        if tp.diverging {
            let cx = level_profile(problem, |p| {
                Ok(exact_constant(p, Form::Primal, &opts.norm)?.value)
            })?;
            if !cx.diverging {
                flags.push("atree_counterexample_candidate".to_owned());
            }
        }
        chain_profile = cp.values;
        tree_profile = tp.values;
    }

    let c = primal.value;
    let rel = 1e-9;
    let mut invariants = vec![
        check(
            "duality",
            (primal.value - dual.value).abs() <= 1e-6 * c,
            format!("primal {} dual {}", primal.value, dual.value),
        ),
        check(
            "sufficiency",
            primal.lower <= theta.suff_bound * (1.0 + rel),
            format!("c_exact {} suff_bound {}", c, theta.suff_bound),
        ),
        check(
            "chain_lower_bound",
            chain.value <= primal.upper * (1.0 + rel),
            format!("a_chain {} c_exact {}", chain.value, c),
        ),
    ];
    if let Some(b) = b_ehp {
        invariants.push(check(
            "a_chain_le_b",
            chain.value <= b * (1.0 + rel),
            format!("a_chain {} B {}", chain.value, b),
        ));
        invariants.push(check(
            "b_le_c_le_4b",
            b <= primal.upper * (1.0 + 1e-6) && primal.lower <= 4.0 * b * (1.0 + 1e-6),
            format!("B {} c_exact {}", b, c),
        ));
    }

    Ok(HardyReport {
        p: problem.p(),
        q: problem.q(),
        vertices: problem.tree().vertex_count(),
        a_chain: chain.value,
        a_chain_argmax: chain.argmax,
        a_tree: theta.a_tree,
        theta_star: theta.theta_star,
        suff_bound: theta.suff_bound,
        b_ehp,
        b_lower_bound: ehp.b,
        b_argmax: ehp.arg,
        antichains_evaluated: ehp.evaluated,
        c_exact: c,
        c_dual: dual.value,
        c_upper: primal.upper,
        maximizer: primal.maximizer,
        a_chain_profile: chain_profile,
        a_tree_profile: tree_profile,
        flags,
        invariants,
    })
}
