//! Check registry and randomized falsification.
//!
//! Every check is addressable by a string id, optionally carrying parameters
//! after a colon (`thm23:power:0.3`, `cor19:0.5,1`, `mean_sigma:arith`).
//! [`run_check`] parses the id and dispatches to the implementation;
//! [`falsify`] hammers one check with seeded random draws, in parallel, and
//! reports every violation it finds.
//!
//! Falsification is fully deterministic: trial `i` draws its inputs from a
//! seed mixed as `(seed, i, k)` for the `k`-th operand and uses the
//! dimension `dims[i % dims.len()]`, so the outcome — including the serialized
//! JSON byte for byte — is independent of the number of worker threads.
//! Errors raised by a trial (singular input for a profile check, failed
//! precondition) abort the run and surface as errors; the first failing
//! trial in trial order wins, again independent of scheduling.

use rayon::prelude::*;

use crate::checks::{
    check_ab_equiv, check_cor19, check_cor19_cartesian, check_cor_sing_st, check_cor_sum,
    check_counterexample_svamgm, check_eq13_block, check_eq7_block, check_eq8_block,
    check_eq9_block, check_mean_sigma, check_prop03, check_remark18, check_sing_remarks,
    check_sv_semihypo, check_thm15, check_thm23, check_thm28, check_thm3, FnPair,
};
use crate::classes::{gen_matrix, mix_seed, MatrixKind};
use crate::error::{LabError, Result};
use crate::matrix::ComplexMatrix;
use crate::means::MeanSpec;
use crate::radius::{
    check_corrected_remark, check_hypo_lower, check_lower_spread, check_omega_sandwich,
    check_refinement_chain,
};
use crate::report::{CheckReport, FalsificationResult, Violation};

/// Registry entry: how many operands a check consumes, which corpus its
/// hypotheses expect, and what parameter suffix it accepts.
#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub id: &'static str,
    pub arity: usize,
    /// Corpus matching the check's hypotheses — the sensible default for
    /// falsification runs that are *not* trying to leave the hypothesis
    /// class.
    pub default_corpus: MatrixKind,
    /// Human description of the optional `:suffix`, empty when none.
    pub params: &'static str,
    pub summary: &'static str,
}

pub const CATALOG: &[CheckSpec] = &[
    CheckSpec {
        id: "thm3",
        arity: 1,
        default_corpus: MatrixKind::Normal,
        params: "",
        summary: "+-Re T below |T| in the positive-semidefinite order",
    },
    CheckSpec {
        id: "prop03",
        arity: 1,
        default_corpus: MatrixKind::Normal,
        params: "",
        summary: "positivity of the |T|-cornered blocks around T and Re T",
    },
    CheckSpec {
        id: "sv_semihypo",
        arity: 1,
        default_corpus: MatrixKind::Ginibre,
        params: "",
        summary: "singular values of T and Re T below those of |T| (+) |T|",
    },
    CheckSpec {
        id: "counterexample_svamgm",
        arity: 1,
        default_corpus: MatrixKind::Ginibre,
        params: "",
        summary: "refutable averaged singular-value domination (sum reading)",
    },
    CheckSpec {
        id: "ab_equiv",
        arity: 1,
        default_corpus: MatrixKind::Invertible,
        params: "",
        summary: "two-sided spread bounds as tight block positivity",
    },
    CheckSpec {
        id: "thm28",
        arity: 1,
        default_corpus: MatrixKind::Invertible,
        params: "",
        summary: "+-Re T below the scaled geometric mean of |T| and |T*|",
    },
    CheckSpec {
        id: "mean_sigma",
        arity: 1,
        default_corpus: MatrixKind::Invertible,
        params: "weight in [0,1] or mean name (default 0.5)",
        summary: "+-Re T below an operator mean of scaled |T| and |T*|",
    },
    CheckSpec {
        id: "thm15",
        arity: 1,
        default_corpus: MatrixKind::Invertible,
        params: "",
        summary: "|Re T| below spread-scaled |T| and |T*|",
    },
    CheckSpec {
        id: "thm23",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "+-Re(ST) below the factored geometric-mean bound",
    },
    CheckSpec {
        id: "remark18",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "substitution family around the product bound",
    },
    CheckSpec {
        id: "cor_sum",
        arity: 4,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "+-Re(T1 T2 +- T3 T4) below the summed factored bounds",
    },
    CheckSpec {
        id: "cor19",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "exponents tp,vp in [0,1.5] (default 1,1)",
        summary: "+-Re(S +- T) below half the four-power sum",
    },
    CheckSpec {
        id: "cor19_cartesian",
        arity: 1,
        default_corpus: MatrixKind::Ginibre,
        params: "exponents tp,vp in [0,1.5] (default 1,1)",
        summary: "Cartesian-parts case of the four-power sum bound",
    },
    CheckSpec {
        id: "sing_remarks",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "singular-value consequences of the block bounds",
    },
    CheckSpec {
        id: "cor_sing_ST",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "singular values of S +- iT below a direct-sum bound",
    },
    CheckSpec {
        id: "eq7_block",
        arity: 1,
        default_corpus: MatrixKind::Normal,
        params: "",
        summary: "positivity of [[|T|, T*],[T, |T|]] alone",
    },
    CheckSpec {
        id: "eq9_block",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "",
        summary: "positivity of the Cauchy-Schwarz block of S and T",
    },
    CheckSpec {
        id: "eq8_block",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "positivity of the factored block of S and T",
    },
    CheckSpec {
        id: "eq13_block",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "function pair (default sqrt)",
        summary: "positivity of the mixed geometric-mean block",
    },
    CheckSpec {
        id: "refinement_chain",
        arity: 2,
        default_corpus: MatrixKind::Ginibre,
        params: "power weight in [0,1] (default 0.5)",
        summary: "ordered chain of radius bounds from mean to split average",
    },
    CheckSpec {
        id: "lower_eq22",
        arity: 1,
        default_corpus: MatrixKind::Invertible,
        params: "",
        summary: "spread-profile lower bound on the numerical radius",
    },
    CheckSpec {
        id: "hypo_lower",
        arity: 1,
        default_corpus: MatrixKind::Normal,
        params: "",
        summary: "radius at least norm over sqrt 2 under the one-sided order",
    },
    CheckSpec {
        id: "corrected_remark",
        arity: 1,
        default_corpus: MatrixKind::Invertible,
        params: "",
        summary: "corrected Cartesian norm-square comparison",
    },
    CheckSpec {
        id: "omega_sandwich",
        arity: 1,
        default_corpus: MatrixKind::Ginibre,
        params: "",
        summary: "universal radius sandwich against norm and spectrum",
    },
];

pub fn find_spec(base: &str) -> Option<&'static CheckSpec> {
    CATALOG.iter().find(|s| s.id == base)
}

/// Splits `"base:params"`; the params half keeps any further colons.
fn split_id(check_id: &str) -> (&str, Option<&str>) {
    match check_id.split_once(':') {
        Some((base, rest)) => (base, Some(rest)),
        None => (check_id, None),
    }
}

fn no_params(base: &str, params: Option<&str>) -> Result<()> {
    match params {
        None => Ok(()),
        Some(p) => Err(LabError::Usage(format!(
            "check '{base}' takes no parameters, got ':{p}'"
        ))),
    }
}

fn parse_pair(params: Option<&str>) -> Result<FnPair> {
    match params {
        None => Ok(FnPair::sqrt()),
        Some(p) => FnPair::parse(p),
    }
}

fn parse_mean(params: Option<&str>) -> Result<MeanSpec> {
    match params {
        None => MeanSpec::weighted(0.5),
        Some(p) => match p.parse::<f64>() {
            Ok(w) => MeanSpec::weighted(w),
            Err(_) => MeanSpec::named(p),
        },
    }
}

fn parse_exponents(params: Option<&str>) -> Result<(f64, f64)> {
    match params {
        None => Ok((1.0, 1.0)),
        Some(p) => {
            let (a, b) = p.split_once(',').ok_or_else(|| {
                LabError::Usage(format!("expected two comma-separated exponents, got '{p}'"))
            })?;
            let tp: f64 = a
                .trim()
                .parse()
                .map_err(|_| LabError::Usage(format!("bad exponent '{a}'")))?;
            let vp: f64 = b
                .trim()
                .parse()
                .map_err(|_| LabError::Usage(format!("bad exponent '{b}'")))?;
            Ok((tp, vp))
        }
    }
}

fn parse_weight(params: Option<&str>) -> Result<f64> {
    match params {
        None => Ok(0.5),
        Some(p) => p
            .parse()
            .map_err(|_| LabError::Usage(format!("bad power weight '{p}'"))),
    }
}

/// Runs one check by id on explicit operands. The operand count must match
/// the registry arity.
pub fn run_check(
    check_id: &str,
    mats: &[ComplexMatrix],
    tol: Option<f64>,
) -> Result<CheckReport> {
    let (base, params) = split_id(check_id);
    let spec = find_spec(base).ok_or_else(|| LabError::UnknownCheck(check_id.to_string()))?;
    if mats.len() != spec.arity {
        return Err(LabError::Usage(format!(
            "check '{base}' takes {} operand(s), got {}",
            spec.arity,
            mats.len()
        )));
    }
    match base {
        "thm3" => {
            no_params(base, params)?;
            check_thm3(&mats[0], tol)
        }
        "prop03" => {
            no_params(base, params)?;
            check_prop03(&mats[0], tol)
        }
        "sv_semihypo" => {
            no_params(base, params)?;
            check_sv_semihypo(&mats[0], tol)
        }
        "counterexample_svamgm" => {
            no_params(base, params)?;
            check_counterexample_svamgm(&mats[0], tol)
        }
        "ab_equiv" => {
            no_params(base, params)?;
            check_ab_equiv(&mats[0], tol)
        }
        "thm28" => {
            no_params(base, params)?;
            check_thm28(&mats[0], tol)
        }
        "mean_sigma" => check_mean_sigma(&mats[0], &parse_mean(params)?, tol),
        "thm15" => {
            no_params(base, params)?;
            check_thm15(&mats[0], tol)
        }
        "thm23" => check_thm23(&mats[0], &mats[1], &parse_pair(params)?, tol),
        "remark18" => check_remark18(&mats[0], &mats[1], &parse_pair(params)?, tol),
        "cor_sum" => check_cor_sum(
            &mats[0],
            &mats[1],
            &mats[2],
            &mats[3],
            &parse_pair(params)?,
            tol,
        ),
        "cor19" => {
            let (tp, vp) = parse_exponents(params)?;
            check_cor19(&mats[0], &mats[1], tp, vp, tol)
        }
        "cor19_cartesian" => {
            let (tp, vp) = parse_exponents(params)?;
            check_cor19_cartesian(&mats[0], tp, vp, tol)
        }
        "sing_remarks" => check_sing_remarks(&mats[0], &mats[1], &parse_pair(params)?, tol),
        "cor_sing_ST" => check_cor_sing_st(&mats[0], &mats[1], &parse_pair(params)?, tol),
        "eq7_block" => {
            no_params(base, params)?;
            check_eq7_block(&mats[0], tol)
        }
        "eq9_block" => {
            no_params(base, params)?;
            check_eq9_block(&mats[0], &mats[1], tol)
        }
        "eq8_block" => check_eq8_block(&mats[0], &mats[1], &parse_pair(params)?, tol),
        "eq13_block" => check_eq13_block(&mats[0], &mats[1], &parse_pair(params)?, tol),
        "refinement_chain" => {
            check_refinement_chain(&mats[0], &mats[1], parse_weight(params)?, tol)
        }
        "lower_eq22" => {
            no_params(base, params)?;
            check_lower_spread(&mats[0], tol)
        }
        "hypo_lower" => {
            no_params(base, params)?;
            check_hypo_lower(&mats[0], tol)
        }
        "corrected_remark" => {
            no_params(base, params)?;
            check_corrected_remark(&mats[0], tol)
        }
        "omega_sandwich" => {
            no_params(base, params)?;
            check_omega_sandwich(&mats[0], tol)
        }
        _ => unreachable!("catalog and dispatch table agree"),
    }
}

/// Configuration of one falsification run.
#[derive(Debug, Clone)]
pub struct FalsifyConfig {
    pub trials: u64,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub corpus: MatrixKind,
    /// Absolute tolerance override handed to every trial's check.
    pub tol: Option<f64>,
}

/// Runs `trials` seeded random draws of a check in parallel and collects
/// every violation, worst margin first. See the module doc for the
/// determinism guarantees.
pub fn falsify(check_id: &str, cfg: &FalsifyConfig) -> Result<FalsificationResult> {
    let (base, _) = split_id(check_id);
    let spec = find_spec(base).ok_or_else(|| LabError::UnknownCheck(check_id.to_string()))?;
    if cfg.trials == 0 {
        return Err(LabError::Usage("falsification needs at least one trial".into()));
    }
    if cfg.dims.is_empty() || cfg.dims.contains(&0) {
        return Err(LabError::Usage(
            "falsification needs a nonempty list of positive dimensions".into(),
        ));
    }

    let outcomes: Vec<Result<CheckReport>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let dim = cfg.dims[(trial % cfg.dims.len() as u64) as usize];
            let mats = (0..spec.arity)
                .map(|k| gen_matrix(cfg.corpus, dim, mix_seed(cfg.seed, &[trial, k as u64])))
                .collect::<Result<Vec<_>>>()?;
            run_check(check_id, &mats, cfg.tol)
        })
        .collect();

    let mut best_margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        let report = outcome?;
        best_margin = best_margin.min(report.margin);
        if !report.passed {
            violations.push(Violation {
                margin: report.margin,
                trial: trial as u64,
                witness: report.witness.unwrap_or(serde_json::Value::Null),
            });
        }
    }
    violations.sort_by(|a, b| a.margin.total_cmp(&b.margin).then(a.trial.cmp(&b.trial)));
    Ok(FalsificationResult {
        check_id: check_id.to_string(),
        trials: cfg.trials,
        violations,
        best_margin,
    })
}
