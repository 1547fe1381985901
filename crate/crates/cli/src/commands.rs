//! `check`, `solve`, `replay` and `corpus`.

use arbpack::augment::{
    augment_both, augment_lower, augment_upper, complete_to_spanning, replay as replay_steps,
    AugmentConfig, AugmentResult, StepAction,
};
use arbpack::bipartite::{check_cond_44, cover_greedy, reduce_to_cover, CoverResult};
use arbpack::corpus::{
    random_digraph, random_state, rng_for, with_random_bounds, BoundKind, Profile, StateParams,
};
use arbpack::decompose::{
    balance_decomposition, decompose_cplus, decompose_start, fractional_arboricity, DecomposeResult,
};
use arbpack::oracles::{
    check_cai_frank, check_cond_11, check_cond_2, check_cond_22, check_cond_4, check_cond_54r,
    check_edmonds, check_spanning_pack, ConditionId, Verdict, ViolationCertificate,
};
use arbpack::pack::{
    branchings_from, exact_sizes_start, pack_exact_sizes, pack_prescribed, pack_rootsets,
    pack_spanning, prescribed_start, rootsets_start, PackResult,
};
use arbpack::{Branching, Digraph, ForestState, Subset};
use rand::Rng;
use rayon::prelude::*;

use crate::format::{
    arc_lists, CertificateJson, InstanceFile, Names, ResultFile, Status, StepJson,
};
use crate::harness::{Harness, Outcome};
use crate::CliError;

pub const MODES: [&str; 12] = [
    "complete",
    "augment_lower",
    "augment_upper",
    "augment_both",
    "pack_rootsets",
    "pack_prescribed",
    "pack_exact",
    "pack_spanning",
    "decompose",
    "decompose_cplus",
    "balance",
    "cover",
];

pub const CHECKS: [&str; 10] = [
    "cond11",
    "cond4",
    "cond22",
    "cond2",
    "edmonds",
    "spanning",
    "cai_frank",
    "cond54r",
    "cond44",
    "arboricity",
];

fn infeasible(mode: Option<&str>, cert: &ViolationCertificate, names: &Names) -> ResultFile {
    ResultFile {
        mode: mode.map(str::to_owned),
        certificate: Some(CertificateJson::new(cert, names)),
        ..ResultFile::new(Status::Infeasible)
    }
}

fn verdict_result(verdict: Verdict, names: &Names) -> ResultFile {
    match verdict {
        Verdict::Holds => ResultFile::new(Status::Ok),
        Verdict::Violated(cert) => infeasible(None, &cert, names),
    }
}

fn plain_state(inst: &InstanceFile) -> Result<ForestState, CliError> {
    let mut bare = inst.clone();
    bare.lower = None;
    bare.upper = None;
    bare.state()
}

/// Evaluates one named condition on an instance.
pub fn check(inst: &InstanceFile, condition: &str) -> Result<ResultFile, CliError> {
    let cfg = AugmentConfig::default().check;
    let names = inst.names()?;
    let verdict = match condition {
        "cond11" => check_cond_11(&inst.state()?, &cfg)?,
        "cond54r" => check_cond_54r(&inst.state()?, &cfg)?,
        "cond4" => check_cond_4(&inst.state()?, &cfg)?,
        "cond22" => check_cond_22(&inst.state()?, &cfg)?,
        "cond2" => {
            let u = inst.vertex_sets(&inst.prescribed, "U")?;
            let parts = part_masks(&inst.partition_or_singletons(u.len()));
            check_cond_2(
                &inst.digraph()?,
                &parts,
                inst.need_vec(&inst.c_prime, "c_prime")?,
                &u,
                &cfg,
            )?
        }
        "edmonds" => check_edmonds(
            &inst.digraph()?,
            &inst.vertex_sets(&inst.rootsets, "rootsets")?,
            &cfg,
        )?,
        "spanning" => check_spanning_pack(&inst.digraph()?, inst.need_k()?, &cfg)?,
        "cai_frank" => check_cai_frank(
            &inst.digraph()?,
            inst.need_k()?,
            inst.need_vec(&inst.f, "f")?,
            inst.need_vec(&inst.g, "g")?,
            &cfg,
        )?,
        "cond44" => {
            if inst.is_bipartite() {
                let (b, _, t) = inst.bipartite()?;
                return Ok(verdict_result(check_cond_44(&b), &t));
            }
            let red = reduce_to_cover(&plain_state(inst)?)?;
            match check_cond_44(&red.instance) {
                Verdict::Holds => Verdict::Holds,
                Verdict::Violated(mut cert) => {
                    cert.family = cert.family.iter().map(|&x| red.to_vertices(x)).collect();
                    Verdict::Violated(cert)
                }
            }
        }
        "arboricity" => {
            let d = inst.digraph()?;
            let k = inst.need_k()?;
            let r = fractional_arboricity(&d)?;
            if r.exceeds(k) {
                Verdict::Violated(ViolationCertificate {
                    condition: ConditionId::Arboricity,
                    family: vec![r.witness],
                    index_union: Subset::EMPTY,
                    lhs: d.induced_arc_count(r.witness) as i64,
                    rhs: k as i64 * (r.witness.len() as i64 - 1),
                })
            } else {
                Verdict::Holds
            }
        }
        other => return Err(CliError::Input(format!("unknown condition \"{other}\""))),
    };
    Ok(verdict_result(verdict, &names))
}

fn part_masks(parts: &[Vec<usize>]) -> Vec<Subset> {
    parts.iter().map(|p| p.iter().copied().collect()).collect()
}

fn mode_of<'a>(inst: &'a InstanceFile, mode: Option<&'a str>) -> Result<&'a str, CliError> {
    mode.or(inst.mode.as_deref())
        .ok_or_else(|| CliError::Input("no mode given".into()))
}

fn forests_result(
    mode: &str,
    names: &Names,
    done: &ForestState,
    steps: &[StepAction],
) -> ResultFile {
    ResultFile {
        mode: Some(mode.to_owned()),
        vertices: Some(names.all().to_vec()),
        forests: Some(arc_lists(done.forests())),
        step_log: Some(steps.iter().map(|&s| StepJson::from(s)).collect()),
        ..ResultFile::new(Status::Solution)
    }
}

fn branchings_result(
    mode: &str,
    names: &Names,
    bs: &[Branching],
    steps: Option<&[StepAction]>,
) -> ResultFile {
    ResultFile {
        mode: Some(mode.to_owned()),
        vertices: Some(names.all().to_vec()),
        branchings: Some(bs.iter().map(|b| b.arcs().to_vec()).collect()),
        roots: Some(bs.iter().map(|b| names.list(b.roots())).collect()),
        step_log: steps.map(|s| s.iter().map(|&a| StepJson::from(a)).collect()),
        ..ResultFile::new(Status::Solution)
    }
}

fn augment_out(mode: &str, names: &Names, out: AugmentResult) -> ResultFile {
    match out {
        AugmentResult::Completed(done) => forests_result(mode, names, &done.state, &done.steps),
        AugmentResult::Infeasible(cert) => infeasible(Some(mode), &cert, names),
    }
}

fn pack_out(mode: &str, names: &Names, out: PackResult) -> ResultFile {
    match out {
        PackResult::Packed(p) => branchings_result(mode, names, &p.branchings, Some(&p.steps)),
        PackResult::Infeasible(cert) => infeasible(Some(mode), &cert, names),
    }
}

fn decompose_out(mode: &str, names: &Names, out: DecomposeResult) -> ResultFile {
    match out {
        DecomposeResult::Decomposed(dec) => {
            branchings_result(mode, names, &dec.branchings, Some(&dec.steps))
        }
        DecomposeResult::Infeasible(cert) => infeasible(Some(mode), &cert, names),
    }
}

/// Runs the solver for `mode` (or the instance's own mode).
pub fn solve(inst: &InstanceFile, mode: Option<&str>) -> Result<ResultFile, CliError> {
    let mode = mode_of(inst, mode)?;
    let cfg = AugmentConfig::default();
    let names = inst.names()?;
    Ok(match mode {
        "complete" => {
            let s = plain_state(inst)?;
            augment_out(mode, &names, complete_to_spanning(&s, &s.residual(), &cfg)?)
        }
        "augment_lower" => augment_out(mode, &names, augment_lower(&inst.state()?, &cfg)?),
        "augment_upper" => augment_out(mode, &names, augment_upper(&inst.state()?, &cfg)?),
        "augment_both" => augment_out(mode, &names, augment_both(&inst.state()?, &cfg)?),
        "pack_rootsets" => {
            let roots = inst.vertex_sets(&inst.rootsets, "rootsets")?;
            pack_out(mode, &names, pack_rootsets(&inst.digraph()?, &roots, &cfg)?)
        }
        "pack_prescribed" => {
            let u = inst.vertex_sets(&inst.prescribed, "U")?;
            let parts = inst.partition_or_singletons(u.len());
            let upper = inst.need_vec(&inst.c_prime, "c_prime")?;
            pack_out(
                mode,
                &names,
                pack_prescribed(&inst.digraph()?, &parts, upper, &u, &cfg)?,
            )
        }
        "pack_exact" => pack_out(
            mode,
            &names,
            pack_exact_sizes(&inst.digraph()?, &inst.c_list()?, &cfg)?,
        ),
        "pack_spanning" => pack_out(
            mode,
            &names,
            pack_spanning(&inst.digraph()?, inst.need_k()?, &cfg)?,
        ),
        "decompose" => decompose_out(
            mode,
            &names,
            decompose_cplus(&inst.digraph()?, inst.need_k()?, 0, &cfg)?,
        ),
        "decompose_cplus" => decompose_out(
            mode,
            &names,
            decompose_cplus(&inst.digraph()?, inst.need_k()?, inst.c_scalar()?, &cfg)?,
        ),
        "balance" => {
            let d = inst.digraph()?;
            let bs = balance_decomposition(&d, &inst.input_branchings()?, &cfg)?;
            branchings_result(mode, &names, &bs, None)
        }
        "cover" => cover(inst)?,
        other => return Err(CliError::Input(format!("unknown mode \"{other}\""))),
    })
}

fn cover(inst: &InstanceFile) -> Result<ResultFile, CliError> {
    let (b, s_names, t_names, to_vertices): (_, Names, Names, Option<Vec<usize>>) =
        if inst.is_bipartite() {
            let (b, s, t) = inst.bipartite()?;
            (b, s, t, None)
        } else {
            let red = reduce_to_cover(&plain_state(inst)?)?;
            let s = Names::new(red.instance.s_names(), "S")?;
            (
                red.instance.clone(),
                s,
                inst.names()?,
                Some(red.vertices.clone()),
            )
        };
    let t_name = |t: usize| match &to_vertices {
        Some(vs) => t_names.name(vs[t]).to_owned(),
        None => t_names.name(t).to_owned(),
    };
    Ok(match cover_greedy(&b)? {
        CoverResult::Cover(e) => ResultFile {
            mode: Some("cover".into()),
            cover: Some(
                e.iter()
                    .map(|&(s, t)| [s_names.name(s).to_owned(), t_name(t)])
                    .collect(),
            ),
            ..ResultFile::new(Status::Solution)
        },
        CoverResult::Infeasible(cert) => ResultFile {
            mode: Some("cover".into()),
            certificate: Some(CertificateJson {
                condition: cert.condition.name().into(),
                family: cert
                    .family
                    .iter()
                    .map(|x| x.iter().map(t_name).collect())
                    .collect(),
                index_set: Vec::new(),
                lhs: cert.lhs,
                rhs: cert.rhs,
            }),
            ..ResultFile::new(Status::Infeasible)
        },
    })
}

/// Rebuilds a solution from its step log. Results without a step log are
/// recomputed by solving again.
pub fn replay(inst: &InstanceFile, previous: &ResultFile) -> Result<ResultFile, CliError> {
    let mode = previous
        .mode
        .as_deref()
        .or(inst.mode.as_deref())
        .ok_or_else(|| CliError::Input("no mode to replay".into()))?;
    let steps: Vec<StepAction> = match (&previous.status, &previous.step_log) {
        (Status::Solution, Some(log)) => log.iter().map(|&s| StepAction::from(s)).collect(),
        _ => return solve(inst, Some(mode)),
    };
    let names = inst.names()?;
    let run =
        |start: &ForestState| -> Result<ForestState, CliError> { Ok(replay_steps(start, &steps)?) };
    let branchings = |d: &Digraph, start: &ForestState| -> Result<ResultFile, CliError> {
        let done = run(start)?;
        Ok(branchings_result(
            mode,
            &names,
            &branchings_from(d, &done)?,
            Some(&steps),
        ))
    };
    match mode {
        "complete" => Ok(forests_result(
            mode,
            &names,
            &checked(run(&plain_state(inst)?)?)?,
            &steps,
        )),
        "augment_lower" | "augment_upper" | "augment_both" => Ok(forests_result(
            mode,
            &names,
            &checked(run(&inst.state()?)?)?,
            &steps,
        )),
        "pack_rootsets" => {
            let d = inst.digraph()?;
            branchings(
                &d,
                &rootsets_start(&d, &inst.vertex_sets(&inst.rootsets, "rootsets")?)?,
            )
        }
        "pack_prescribed" => {
            let d = inst.digraph()?;
            let u = inst.vertex_sets(&inst.prescribed, "U")?;
            let parts = inst.partition_or_singletons(u.len());
            let start = prescribed_start(&d, &parts, inst.need_vec(&inst.c_prime, "c_prime")?, &u)?;
            branchings(&d, &start)
        }
        "pack_exact" => {
            let d = inst.digraph()?;
            branchings(&d, &exact_sizes_start(&d, &inst.c_list()?)?)
        }
        "pack_spanning" => {
            let d = inst.digraph()?;
            let k = inst.need_k()?;
            if k == 0 {
                return solve(inst, Some(mode));
            }
            branchings(&d, &exact_sizes_start(&d, &vec![1; k])?)
        }
        "decompose" | "decompose_cplus" => {
            let d = inst.digraph()?;
            let c = if mode == "decompose" {
                0
            } else {
                inst.c_scalar()?
            };
            branchings(&d, &decompose_start(&d, inst.need_k()?, c)?)
        }
        _ => solve(inst, Some(mode)),
    }
}

fn checked(done: ForestState) -> Result<ForestState, CliError> {
    if done.all_spanning() {
        Ok(done)
    } else {
        Err(CliError::Input(
            "step log does not complete every arborescence".into(),
        ))
    }
}

/// Per-theorem tallies of a corpus run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub agree: usize,
    /// Agreements on feasible instances.
    pub feasible: usize,
    pub mismatch: usize,
    pub budget: usize,
    pub errors: usize,
    /// First few problems, for the report.
    pub notes: Vec<String>,
}

impl Tally {
    pub fn add(&mut self, label: &str, r: Result<Outcome, String>) {
        let note = match r {
            Ok(Outcome::Agree(feasible)) => {
                self.agree += 1;
                self.feasible += feasible as usize;
                None
            }
            Ok(Outcome::Budget) => {
                self.budget += 1;
                None
            }
            Ok(Outcome::Mismatch(m)) => {
                self.mismatch += 1;
                Some(format!("{label}: {m}"))
            }
            Err(e) => {
                self.errors += 1;
                Some(format!("{label}: error {e}"))
            }
        };
        if let Some(n) = note {
            if self.notes.len() < 5 {
                self.notes.push(n);
            }
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.agree += other.agree;
        self.feasible += other.feasible;
        self.mismatch += other.mismatch;
        self.budget += other.budget;
        self.errors += other.errors;
        for n in other.notes {
            if self.notes.len() < 5 {
                self.notes.push(n);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatch == 0 && self.errors == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusOptions {
    pub seed: u64,
    pub count: usize,
    pub max_v: usize,
    pub profile: Option<Profile>,
    pub budget: u64,
    pub corrupt_checker: bool,
}

pub const CORPUS_ROWS: [&str; 7] = [
    "completion",
    "lower bounds",
    "upper bounds",
    "two-sided bounds",
    "cover chain",
    "decomposition",
    "spanning packing",
];

/// Runs every comparison on `count` random instances. Instance `i` draws
/// from its own random stream, so results do not depend on scheduling.
pub fn corpus(opts: &CorpusOptions) -> Vec<(&'static str, Tally)> {
    let harness = Harness {
        budget: arbpack::bruteforce::SearchBudget::nodes(opts.budget.max(1)),
        corrupt_checker: opts.corrupt_checker,
        ..Harness::default()
    };
    let per_instance: Vec<Vec<Tally>> = (0..opts.count)
        .into_par_iter()
        .map(|i| corpus_instance(opts, &harness, i))
        .collect();
    let mut rows: Vec<(&'static str, Tally)> =
        CORPUS_ROWS.iter().map(|&r| (r, Tally::default())).collect();
    for tallies in per_instance {
        for (row, t) in rows.iter_mut().zip(tallies) {
            row.1.merge(t);
        }
    }
    rows
}

fn corpus_instance(opts: &CorpusOptions, h: &Harness, i: usize) -> Vec<Tally> {
    let mut rng = rng_for(opts.seed, i as u64);
    let profile = opts.profile.unwrap_or(Profile::ALL[i % Profile::ALL.len()]);
    let params = StateParams {
        max_v: opts.max_v,
        max_k: 3,
        max_arcs: 10,
        profile,
    };
    let label = format!("instance {i}");
    let mut out = vec![Tally::default(); CORPUS_ROWS.len()];
    let state = random_state(&mut rng, &params);
    out[0].add(&label, h.completion(&state));
    for (row, kind) in [
        (1, BoundKind::Lower),
        (2, BoundKind::Upper),
        (3, BoundKind::Both),
    ] {
        let r = with_random_bounds(&mut rng, state.clone(), kind, profile)
            .map_err(|e| e.to_string())
            .and_then(|s| h.bounded(&s));
        out[row].add(&label, r);
    }
    out[4].add(&label, h.cover_chain(&state));
    let n = rng.gen_range(1..=opts.max_v.max(1) + 1);
    let d = random_digraph(&mut rng, n, 10, profile);
    let k = rng.gen_range(1..=3);
    let c = rng.gen_range(0..=n);
    out[5].add(&label, h.decomposition(&d, k, c));
    let n = rng.gen_range(1..=opts.max_v.max(1));
    let d = random_digraph(&mut rng, n, 8, profile);
    let k = rng.gen_range(1..=2);
    out[6].add(&label, h.spanning(&d, k));
    out
}

pub fn corpus_report(rows: &[(&str, Tally)]) -> String {
    let mut s = format!(
        "{:<18} {:>7} {:>9} {:>9} {:>7} {:>7}  result\n",
        "theorem", "agree", "feasible", "mismatch", "budget", "errors"
    );
    for (name, t) in rows {
        s += &format!(
            "{:<18} {:>7} {:>9} {:>9} {:>7} {:>7}  {}\n",
            name,
            t.agree,
            t.feasible,
            t.mismatch,
            t.budget,
            t.errors,
            if t.passed() { "pass" } else { "FAIL" }
        );
        for n in &t.notes {
            s += &format!("    {n}\n");
        }
    }
    s
}
