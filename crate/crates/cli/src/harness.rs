//! Three-way comparisons between constructive solvers, condition checkers
//! and brute-force search, one instance at a time.
//!
//! Every case also validates whatever the solver returned: solutions are
//! checked arc by arc, certificates are recomputed from scratch.

use std::fmt;

use arbpack::augment::{
    augment_both, augment_lower, augment_upper, complete_to_spanning, AugmentConfig, AugmentResult,
};
use arbpack::bipartite::{
    check_cond_44, cover_greedy, cover_to_completion, reduce_to_cover, CoverResult,
};
use arbpack::bruteforce::{
    bf_cover, bf_feasible_completion, bf_feasible_decomposition, RootConstraint, SearchBudget,
};
use arbpack::decompose::{
    balance_decomposition, decompose_cplus, decomposition_obstacle, DecomposeResult,
};
use arbpack::oracles::{
    check_cond_11, check_cond_22, check_cond_4, check_cond_54r, check_spanning_pack,
    evaluate_spanning, reverify_state, CheckConfig, ConditionId, ViolationCertificate,
};
use arbpack::pack::{pack_exact_sizes, pack_spanning, PackResult};
use arbpack::{Branching, Digraph, ForestState, Subset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// All sides agree; `true` when they agree the instance is feasible.
    Agree(bool),
    Mismatch(String),
    Budget,
}

impl Outcome {
    fn from_verdicts(named: &[(&str, bool)]) -> Self {
        if named.iter().all(|&(_, v)| v == named[0].1) {
            Outcome::Agree(named[0].1)
        } else {
            let parts: Vec<String> = named.iter().map(|(n, v)| format!("{n}={v}")).collect();
            Outcome::Mismatch(parts.join(" "))
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Agree(true) => f.write_str("agree (feasible)"),
            Outcome::Agree(false) => f.write_str("agree (infeasible)"),
            Outcome::Mismatch(m) => write!(f, "mismatch ({m})"),
            Outcome::Budget => f.write_str("budget exceeded"),
        }
    }
}

/// Knobs shared by all cases.
#[derive(Clone, Copy, Debug, Default)]
pub struct Harness {
    pub augment: AugmentConfig,
    pub budget: SearchBudget,
    /// Deliberately negate the condition checker, to test the harness.
    pub corrupt_checker: bool,
}

type Res<T> = Result<T, String>;

fn core<T>(r: arbpack::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

impl Harness {
    fn check(&self, holds: bool) -> bool {
        holds != self.corrupt_checker
    }

    fn cfg(&self) -> &CheckConfig {
        &self.augment.check
    }

    /// Completion without bounds: solver, condition (11), brute force.
    pub fn completion(&self, state: &ForestState) -> Res<Outcome> {
        let plain = strip_bounds(state)?;
        let solver = core(complete_to_spanning(
            &plain,
            &plain.residual(),
            &self.augment,
        ))?;
        validate_augment(&plain, &solver)?;
        let cond = self.check(core(check_cond_11(&plain, self.cfg()))?.holds());
        let Some(bf) = core(bf_feasible_completion(&plain, self.budget))?.decided() else {
            return Ok(Outcome::Budget);
        };
        Ok(Outcome::from_verdicts(&[
            ("solver", solver.is_completed()),
            ("cond11", cond),
            ("bruteforce", bf),
        ]))
    }

    /// Completion within the bounds active on `state`.
    pub fn bounded(&self, state: &ForestState) -> Res<Outcome> {
        let (solver, cond) = match (state.lower().is_some(), state.upper().is_some()) {
            (true, false) => (
                core(augment_lower(state, &self.augment))?,
                core(check_cond_4(state, self.cfg()))?.holds(),
            ),
            (false, true) => (
                core(augment_upper(state, &self.augment))?,
                core(check_cond_11(state, self.cfg()))?.holds()
                    && core(check_cond_22(state, self.cfg()))?.holds(),
            ),
            (true, true) => (
                core(augment_both(state, &self.augment))?,
                core(check_cond_4(state, self.cfg()))?.holds()
                    && core(check_cond_22(state, self.cfg()))?.holds(),
            ),
            (false, false) => return self.completion(state),
        };
        validate_augment(state, &solver)?;
        let Some(bf) = core(bf_feasible_completion(state, self.budget))?.decided() else {
            return Ok(Outcome::Budget);
        };
        Ok(Outcome::from_verdicts(&[
            ("solver", solver.is_completed()),
            ("conditions", self.check(cond)),
            ("bruteforce", bf),
        ]))
    }

    /// Completability, (11), (54-R), the cap condition on the reduced
    /// covering instance, the greedy cover and a brute-force cover.
    pub fn cover_chain(&self, state: &ForestState) -> Res<Outcome> {
        let plain = strip_bounds(state)?;
        let Some(completable) = core(bf_feasible_completion(&plain, self.budget))?.decided() else {
            return Ok(Outcome::Budget);
        };
        let c11 = core(check_cond_11(&plain, self.cfg()))?.holds();
        let c54 = self.check(core(check_cond_54r(&plain, self.cfg()))?.holds());
        let red = core(reduce_to_cover(&plain))?;
        if let Some((x, y)) = red.instance.supermodularity_violation() {
            return Err(format!(
                "reduced demand is not supermodular on {x:?}, {y:?}"
            ));
        }
        let c44 = check_cond_44(&red.instance);
        if let Some(cert) = c44.certificate() {
            // the same vertex set must violate (54-R)
            let x = red.to_vertices(cert.family[0]);
            let (lhs, rhs) = core(arbpack::oracles::evaluate_cond_54r(&plain, x))?;
            if lhs >= rhs {
                return Err("cap-condition witness does not violate (54-R)".into());
            }
        }
        let greedy = match core(cover_greedy(&red.instance))? {
            CoverResult::Cover(e) => {
                let rooted = core(cover_to_completion(&plain, &red, &e))?;
                let pool = rooted.nonroot_residual();
                let done = core(complete_to_spanning(&rooted, &pool, &self.augment))?;
                if !done.is_completed() {
                    return Err("greedy cover does not extend to a completion".into());
                }
                true
            }
            CoverResult::Infeasible(_) => false,
        };
        let Some(bf) = core(bf_cover(&red.instance, self.budget))?.decided() else {
            return Ok(Outcome::Budget);
        };
        Ok(Outcome::from_verdicts(&[
            ("completable", completable),
            ("cond11", c11),
            ("cond54r", c54),
            ("cond44", check_cond_44(&red.instance).holds()),
            ("greedy", greedy),
            ("bf_cover", bf),
        ]))
    }

    /// Decomposition into `k` branchings with at least `c` roots each. When
    /// it succeeds, the balanced decomposition is checked as well.
    pub fn decomposition(&self, d: &Digraph, k: usize, c: usize) -> Res<Outcome> {
        let solver = core(decompose_cplus(d, k, c, &self.augment))?;
        match &solver {
            DecomposeResult::Decomposed(dec) => {
                validate_decomposition(d, &dec.branchings, |r| r >= c)?;
                let parts: Vec<_> = dec.branchings.iter().map(|b| b.arcs().clone()).collect();
                let balanced = core(balance_decomposition(d, &parts, &self.augment))?;
                let total = k * d.vertex_count() - d.arc_count();
                let (lo, hi) = (total / k, total.div_ceil(k));
                validate_decomposition(d, &balanced, |r| r == lo || r == hi)?;
                let (alo, ahi) = (d.arc_count() / k, d.arc_count().div_ceil(k));
                if balanced
                    .iter()
                    .any(|b| b.arcs().len() != alo && b.arcs().len() != ahi)
                {
                    return Err("balanced arc counts are uneven".into());
                }
            }
            DecomposeResult::Infeasible(cert) => reverify_obstacle(d, k, c, cert)?,
        }
        let cond = self.check(core(decomposition_obstacle(d, k, c))?.is_none());
        let constraints = vec![RootConstraint::at_least(c); k];
        let Some(bf) = core(bf_feasible_decomposition(d, &constraints, self.budget))?.decided()
        else {
            return Ok(Outcome::Budget);
        };
        Ok(Outcome::from_verdicts(&[
            ("solver", solver.decomposition().is_some()),
            ("conditions", cond),
            ("bruteforce", bf),
        ]))
    }

    /// `k` spanning arborescences: direct packing, the family condition,
    /// and exact root-set sizes all equal to one.
    pub fn spanning(&self, d: &Digraph, k: usize) -> Res<Outcome> {
        let direct = core(pack_spanning(d, k, &self.augment))?;
        let exact = core(pack_exact_sizes(d, &vec![1; k], &self.augment))?;
        for out in [&direct, &exact] {
            match out {
                PackResult::Packed(p) => validate_packing(d, &p.branchings, |r| r == 1)?,
                PackResult::Infeasible(cert) => reverify_spanning_like(d, k, cert)?,
            }
        }
        let cond = self.check(core(check_spanning_pack(d, k, self.cfg()))?.holds());
        Ok(Outcome::from_verdicts(&[
            ("pack_spanning", direct.packing().is_some()),
            ("spanning", cond),
            ("pack_exact", exact.packing().is_some()),
        ]))
    }
}

fn strip_bounds(state: &ForestState) -> Res<ForestState> {
    core(ForestState::new(
        state.instance().clone(),
        state.forests().to_vec(),
    ))
}

/// Checks a completion arc by arc, or recomputes its certificate.
pub fn validate_augment(start: &ForestState, out: &AugmentResult) -> Res<()> {
    match out {
        AugmentResult::Completed(done) => validate_completion(start, &done.state),
        AugmentResult::Infeasible(cert) => {
            if core(reverify_state(start, cert))? {
                Ok(())
            } else {
                Err(format!("{} certificate does not re-verify", cert.condition))
            }
        }
    }
}

/// Spanning arborescences with `|V|` arcs each, arc-disjoint, extending
/// the start forests, with every part inside the start state's bounds.
pub fn validate_completion(start: &ForestState, done: &ForestState) -> Res<()> {
    let d = start.instance().digraph();
    let x = start.root();
    let n = start.ground().len();
    let mut seen = arbpack::ArcSet::new();
    for (i, f) in done.forests().iter().enumerate() {
        if !start.forest(i).is_subset(f) {
            return Err(format!("forest {i} dropped an initial arc"));
        }
        if f.len() != n || d.arborescence_vertices(x, f) != Some(d.vertices()) {
            return Err(format!("forest {i} is not a spanning arborescence"));
        }
        if !seen.is_disjoint(f) {
            return Err(format!("forest {i} shares an arc"));
        }
        seen.union_with(f);
    }
    for a in 0..start.l() {
        let roots: i64 = start
            .part(a)
            .iter()
            .map(|i| {
                done.forest(i)
                    .iter()
                    .filter(|&e| d.arc(e).tail == x)
                    .count() as i64
            })
            .sum();
        if start.lower().is_some_and(|c| roots < c[a])
            || start.upper().is_some_and(|c| roots > c[a])
        {
            return Err(format!("part {a} is outside its bounds"));
        }
    }
    Ok(())
}

pub fn validate_packing(
    d: &Digraph,
    bs: &[Branching],
    roots_ok: impl Fn(usize) -> bool,
) -> Res<()> {
    let mut seen = arbpack::ArcSet::new();
    for (i, b) in bs.iter().enumerate() {
        if !d.is_branching(b.arcs()) {
            return Err(format!("branching {i} is not a branching"));
        }
        let roots = core(d.root_set(b.arcs()))?;
        if roots != b.roots()
            || roots.len() + b.arcs().len() != d.vertex_count()
            || !roots_ok(roots.len())
        {
            return Err(format!("branching {i} has the wrong roots"));
        }
        if !seen.is_disjoint(b.arcs()) {
            return Err(format!("branching {i} shares an arc"));
        }
        seen.union_with(b.arcs());
    }
    Ok(())
}

pub fn validate_decomposition(
    d: &Digraph,
    bs: &[Branching],
    roots_ok: impl Fn(usize) -> bool,
) -> Res<()> {
    validate_packing(d, bs, roots_ok)?;
    let total: usize = bs.iter().map(|b| b.arcs().len()).sum();
    if total != d.arc_count() {
        return Err("branchings do not use every arc".into());
    }
    Ok(())
}

/// Recomputes a decomposition obstacle from the digraph.
pub fn reverify_obstacle(d: &Digraph, k: usize, c: usize, cert: &ViolationCertificate) -> Res<()> {
    let all = d.all_arcs();
    let k = k as i64;
    let [x] = cert.family.as_slice() else {
        return Err("obstacle certificate needs one set".into());
    };
    let (lhs, rhs) = match cert.condition {
        ConditionId::MaxIndegree if x.len() == 1 => (core(d.in_degree(&all, *x))? as i64, k),
        ConditionId::Arboricity if x.len() >= 2 => {
            (d.induced_arc_count(*x) as i64, k * (x.len() as i64 - 1))
        }
        ConditionId::GlobalCount if *x == d.vertices() => (
            d.arc_count() as i64,
            k * (d.vertex_count() as i64 - c as i64),
        ),
        _ => return Err(format!("unexpected obstacle {}", cert.condition)),
    };
    if cert.matches(lhs, rhs) {
        Ok(())
    } else {
        Err(format!("{} obstacle does not re-verify", cert.condition))
    }
}

pub fn reverify_spanning_like(d: &Digraph, k: usize, cert: &ViolationCertificate) -> Res<()> {
    let ok = match cert.condition {
        ConditionId::Spanning => {
            let (lhs, rhs) = core(evaluate_spanning(d, k, &cert.family))?;
            cert.matches(lhs, rhs)
        }
        ConditionId::Cond2 => {
            let parts: Vec<Subset> = (0..k).map(Subset::singleton).collect();
            let (lhs, rhs) = core(arbpack::oracles::evaluate_cond_2(
                d,
                &parts,
                &vec![1; k],
                &vec![Subset::EMPTY; k],
                &cert.family,
                cert.index_union,
            ))?;
            cert.matches(lhs, rhs)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{} certificate does not re-verify", cert.condition))
    }
}
