//! Step-by-step completion of arborescences to spanning ones, optionally
//! under lower and upper bounds on the root arcs used by each part.
//!
//! Each engine first decides feasibility with the exact conditions from
//! [`crate::oracles`]. When they hold, it grows the forests one arc at a
//! time, accepting the first candidate (in a fixed scan order) after which
//! the conditions still hold. The conditions characterize feasibility, so
//! a candidate always exists; failing to find one is reported as an
//! internal error.
//!
//! The input state is never modified. All work happens on a copy.

use crate::bits::ArcSet;
use crate::digraph::ArcId;
use crate::error::{contract, internal, Result};
use crate::oracles::{
    check_cond_11, check_cond_11_pool, check_cond_22, check_cond_4, find_u, find_v, CheckConfig,
    Verdict, ViolationCertificate,
};
use crate::state::ForestState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepAction {
    AddRootArc { forest: usize, arc: ArcId },
    AddInternalArc { forest: usize, arc: ArcId },
    DecrementUpper { part: usize },
}

/// How the upper-bound engine found its steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub decrements: usize,
    /// Root arcs found through the tight families `U` and `V`.
    pub guided: usize,
    /// Root arcs found only by the plain scan.
    pub scanned: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    /// Final state with the caller's bounds.
    pub state: ForestState,
    pub steps: Vec<StepAction>,
    pub stats: StepStats,
}

impl Completion {
    pub fn forests(&self) -> &[ArcSet] {
        self.state.forests()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AugmentResult {
    Completed(Completion),
    Infeasible(ViolationCertificate),
}

impl AugmentResult {
    pub fn completion(&self) -> Option<&Completion> {
        match self {
            AugmentResult::Completed(c) => Some(c),
            AugmentResult::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&ViolationCertificate> {
        match self {
            AugmentResult::Completed(_) => None,
            AugmentResult::Infeasible(c) => Some(c),
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, AugmentResult::Completed(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AugmentConfig {
    pub check: CheckConfig,
    /// Try the tight-family candidates before the plain scan in the
    /// upper-bound engine.
    pub guided: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            check: CheckConfig::default(),
            guided: true,
        }
    }
}

/// Applies one logged step to `state`.
pub fn apply_step(state: &mut ForestState, step: StepAction) -> Result<()> {
    let d = state.instance().digraph();
    match step {
        StepAction::AddRootArc { forest, arc } => {
            if arc >= d.arc_count() || d.arc(arc).tail != state.root() {
                return Err(contract(format!("arc {arc} is not a root arc")));
            }
            state.add_arc(forest, arc)
        }
        StepAction::AddInternalArc { forest, arc } => {
            if arc >= d.arc_count() || d.arc(arc).tail == state.root() {
                return Err(contract(format!("arc {arc} is not an internal arc")));
            }
            state.add_arc(forest, arc)
        }
        StepAction::DecrementUpper { part } => state.decrement_upper(part),
    }
}

/// Replays a step log on `state`. Bounds lowered during the run are
/// restored afterwards, as in the engines' results.
pub fn replay(state: &ForestState, steps: &[StepAction]) -> Result<ForestState> {
    let mut work = state.clone();
    for &s in steps {
        apply_step(&mut work, s)?;
    }
    work.set_upper_unchecked(state.upper().map(<[i64]>::to_vec));
    Ok(work)
}

fn step_for(state: &ForestState, forest: usize, arc: ArcId) -> StepAction {
    if state.instance().digraph().arc(arc).tail == state.root() {
        StepAction::AddRootArc { forest, arc }
    } else {
        StepAction::AddInternalArc { forest, arc }
    }
}

/// Root arcs not used by any forest, by id.
fn free_root_arcs(state: &ForestState) -> Vec<ArcId> {
    let d = state.instance().digraph();
    let x = state.root();
    state
        .residual()
        .iter()
        .filter(|&e| d.arc(e).tail == x)
        .collect()
}

fn with_arc(state: &ForestState, forest: usize, arc: ArcId) -> Result<ForestState> {
    let mut next = state.clone();
    next.add_arc(forest, arc)?;
    Ok(next)
}

/// Completes the forests to spanning arborescences using only arcs of
/// `pool`, or returns the set on which the pool-restricted condition (11)
/// fails. Bounds on the state are ignored.
pub fn complete_to_spanning(
    state: &ForestState,
    pool: &ArcSet,
    cfg: &AugmentConfig,
) -> Result<AugmentResult> {
    let used = state.used_arcs();
    if !pool.is_disjoint(&used) {
        return Err(contract("the arc pool overlaps the forests"));
    }
    state.instance().digraph().check_arc_set(pool)?;
    if let Verdict::Violated(cert) = check_cond_11_pool(state, pool, &cfg.check)? {
        return Ok(AugmentResult::Infeasible(cert));
    }
    let mut work = state.clone();
    work.set_upper_unchecked(None);
    work.set_lower_unchecked(None);
    let mut pool = pool.clone();
    let mut steps = Vec::new();
    complete_in_place(&mut work, &mut pool, &mut steps, cfg)?;
    work.set_upper_unchecked(state.upper().map(<[i64]>::to_vec));
    work.set_lower_unchecked(state.lower().map(<[i64]>::to_vec));
    Ok(AugmentResult::Completed(Completion {
        state: work,
        steps,
        stats: StepStats::default(),
    }))
}

fn complete_in_place(
    work: &mut ForestState,
    pool: &mut ArcSet,
    steps: &mut Vec<StepAction>,
    cfg: &AugmentConfig,
) -> Result<()> {
    let d = work.instance().digraph().clone();
    while !work.all_spanning() {
        let mut accepted = None;
        'scan: for i in (0..work.k()).filter(|&i| !work.is_spanning(i)) {
            let covered = work.covered(i);
            for e in pool.iter() {
                let a = d.arc(e);
                if !covered.contains(a.tail) || covered.contains(a.head) {
                    continue;
                }
                let next = with_arc(work, i, e)?;
                let mut rest = pool.clone();
                rest.remove(e);
                if check_cond_11_pool(&next, &rest, &cfg.check)?.holds() {
                    accepted = Some((i, e, next, rest));
                    break 'scan;
                }
            }
        }
        let Some((i, e, next, rest)) = accepted else {
            return Err(internal(
                "completion condition holds but no arc keeps it; the completion engine is wrong",
            ));
        };
        steps.push(step_for(work, i, e));
        *work = next;
        *pool = rest;
    }
    Ok(())
}

fn lower_deficiency(state: &ForestState, lower: &[i64]) -> i64 {
    (0..state.l())
        .map(|a| (lower[a] - state.part_root_degree(a) as i64).max(0))
        .sum()
}

fn upper_slack_total(state: &ForestState, upper: &[i64]) -> i64 {
    (0..state.l())
        .map(|a| upper[a] - state.part_root_degree(a) as i64)
        .sum()
}

/// Completes the forests so that every part `α` uses at least `c_α` root arcs.
pub fn augment_lower(state: &ForestState, cfg: &AugmentConfig) -> Result<AugmentResult> {
    let lower = state
        .lower()
        .ok_or_else(|| contract("lower-bound augmentation needs lower bounds"))?
        .to_vec();
    if state.upper().is_some() {
        return Err(contract("lower-bound augmentation takes no upper bounds"));
    }
    if let Verdict::Violated(cert) = check_cond_4(state, &cfg.check)? {
        return Ok(AugmentResult::Infeasible(cert));
    }
    let mut work = state.clone();
    let mut steps = Vec::new();
    raise_to_lower(&mut work, &lower, &mut steps, cfg, |s| {
        Ok(check_cond_4(s, &cfg.check)?.holds())
    })?;
    let mut pool = work.residual();
    complete_in_place(&mut work, &mut pool, &mut steps, cfg)?;
    finish(state, work, steps, StepStats::default())
}

/// Adds root arcs to lower-deficient parts while `keeps` accepts the result.
fn raise_to_lower(
    work: &mut ForestState,
    lower: &[i64],
    steps: &mut Vec<StepAction>,
    _cfg: &AugmentConfig,
    keeps: impl Fn(&ForestState) -> Result<bool>,
) -> Result<()> {
    let d = work.instance().digraph().clone();
    loop {
        let before = lower_deficiency(work, lower);
        if before == 0 {
            return Ok(());
        }
        let mut accepted = None;
        'scan: for (a, &need) in lower.iter().enumerate() {
            if work.part_root_degree(a) as i64 >= need {
                continue;
            }
            for i in work.part(a).iter() {
                for e in free_root_arcs(work) {
                    if work.covered(i).contains(d.arc(e).head) {
                        continue;
                    }
                    let next = with_arc(work, i, e)?;
                    if keeps(&next)? {
                        accepted = Some((i, e, next));
                        break 'scan;
                    }
                }
            }
        }
        let Some((i, e, next)) = accepted else {
            return Err(internal(
                "lower-bound condition holds but no root arc keeps it; the engine is wrong",
            ));
        };
        if lower_deficiency(&next, lower) >= before {
            return Err(internal(
                "root arc step did not reduce the lower deficiency",
            ));
        }
        steps.push(StepAction::AddRootArc { forest: i, arc: e });
        *work = next;
    }
}

/// Completes the forests so that every part `α` uses at most `c′_α` root arcs.
pub fn augment_upper(state: &ForestState, cfg: &AugmentConfig) -> Result<AugmentResult> {
    if state.upper().is_none() {
        return Err(contract("upper-bound augmentation needs upper bounds"));
    }
    if state.lower().is_some() {
        return Err(contract("upper-bound augmentation takes no lower bounds"));
    }
    for verdict in [
        check_cond_11(state, &cfg.check)?,
        check_cond_22(state, &cfg.check)?,
    ] {
        if let Verdict::Violated(cert) = verdict {
            return Ok(AugmentResult::Infeasible(cert));
        }
    }
    let mut work = state.clone();
    let mut steps = Vec::new();
    let stats = upper_loop(&mut work, &mut steps, cfg)?;
    finish(state, work, steps, stats)
}

fn holds_11_and_22(s: &ForestState, cfg: &AugmentConfig) -> Result<bool> {
    Ok(check_cond_11(s, &cfg.check)?.holds() && check_cond_22(s, &cfg.check)?.holds())
}

/// Uses up the slack of every part, by lowering bounds or adding root
/// arcs, then completes with non-root arcs.
fn upper_loop(
    work: &mut ForestState,
    steps: &mut Vec<StepAction>,
    cfg: &AugmentConfig,
) -> Result<StepStats> {
    let mut stats = StepStats::default();
    loop {
        let upper = work.upper().expect("upper bounds").to_vec();
        let slack_parts: Vec<usize> = (0..work.l())
            .filter(|&a| (work.part_root_degree(a) as i64) < upper[a])
            .collect();
        if slack_parts.is_empty() {
            break;
        }
        let before = upper_slack_total(work, &upper);

        let mut next_state = None;
        for &a in &slack_parts {
            let mut next = work.clone();
            next.decrement_upper(a)?;
            if check_cond_22(&next, &cfg.check)?.holds() {
                next_state = Some((StepAction::DecrementUpper { part: a }, next));
                stats.decrements += 1;
                break;
            }
        }
        if next_state.is_none() && cfg.guided {
            next_state = guided_root_step(work, &slack_parts, cfg)?;
            if next_state.is_some() {
                stats.guided += 1;
            }
        }
        if next_state.is_none() {
            next_state = scanned_root_step(work, &slack_parts, cfg)?;
            if next_state.is_some() {
                stats.scanned += 1;
            }
        }
        let Some((step, next)) = next_state else {
            return Err(internal(
                "upper-bound conditions hold but neither a bound decrement nor a root arc keeps them",
            ));
        };
        let next_upper = next.upper().expect("upper bounds").to_vec();
        if upper_slack_total(&next, &next_upper) >= before {
            return Err(internal("upper-bound step did not reduce the total slack"));
        }
        steps.push(step);
        *work = next;
    }
    let mut pool = work.nonroot_residual();
    if !check_cond_11_pool(work, &pool, &cfg.check)?.holds() {
        return Err(internal(
            "all parts are tight but the non-root arcs cannot complete the forests",
        ));
    }
    complete_in_place(work, &mut pool, steps, cfg)?;
    Ok(stats)
}

/// Root arc into a set of the minimum tight family, below a set of the
/// maximum tight family that the receiving forest misses.
fn guided_root_step(
    work: &ForestState,
    slack_parts: &[usize],
    cfg: &AugmentConfig,
) -> Result<Option<(StepAction, ForestState)>> {
    let all = work.all_indices();
    let Some(top) = find_u(work, all, &cfg.check)? else {
        return Ok(None);
    };
    let Some(bottom) = find_v(work, all, &cfg.check)? else {
        return Ok(None);
    };
    let d = work.instance().digraph();
    let free = free_root_arcs(work);
    for &a in slack_parts {
        for &x0 in top.members() {
            for i0 in work.part(a).iter() {
                if work.covered(i0).intersects(x0) {
                    continue;
                }
                for &y0 in bottom.members().iter().filter(|y| y.is_subset(x0)) {
                    for &e in free.iter().filter(|&&e| y0.contains(d.arc(e).head)) {
                        let next = with_arc(work, i0, e)?;
                        if holds_11_and_22(&next, cfg)? {
                            return Ok(Some((StepAction::AddRootArc { forest: i0, arc: e }, next)));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn scanned_root_step(
    work: &ForestState,
    slack_parts: &[usize],
    cfg: &AugmentConfig,
) -> Result<Option<(StepAction, ForestState)>> {
    let d = work.instance().digraph();
    let free = free_root_arcs(work);
    for &a in slack_parts {
        for i in work.part(a).iter() {
            for &e in &free {
                if work.covered(i).contains(d.arc(e).head) {
                    continue;
                }
                let next = with_arc(work, i, e)?;
                if holds_11_and_22(&next, cfg)? {
                    return Ok(Some((StepAction::AddRootArc { forest: i, arc: e }, next)));
                }
            }
        }
    }
    Ok(None)
}

/// Completes the forests within both lower and upper bounds.
pub fn augment_both(state: &ForestState, cfg: &AugmentConfig) -> Result<AugmentResult> {
    let lower = state
        .lower()
        .ok_or_else(|| contract("two-sided augmentation needs lower bounds"))?
        .to_vec();
    if state.upper().is_none() {
        return Err(contract("two-sided augmentation needs upper bounds"));
    }
    for verdict in [
        check_cond_4(state, &cfg.check)?,
        check_cond_22(state, &cfg.check)?,
    ] {
        if let Verdict::Violated(cert) = verdict {
            return Ok(AugmentResult::Infeasible(cert));
        }
    }
    let mut work = state.clone();
    let mut steps = Vec::new();
    raise_to_lower(&mut work, &lower, &mut steps, cfg, |s| {
        Ok(check_cond_4(s, &cfg.check)?.holds() && check_cond_22(s, &cfg.check)?.holds())
    })?;
    work.set_lower_unchecked(None);
    let stats = upper_loop(&mut work, &mut steps, cfg)?;
    finish(state, work, steps, stats)
}

/// Restores the caller's bounds and checks the result before handing it out.
fn finish(
    original: &ForestState,
    mut work: ForestState,
    steps: Vec<StepAction>,
    stats: StepStats,
) -> Result<AugmentResult> {
    work.set_upper_unchecked(original.upper().map(<[i64]>::to_vec));
    work.set_lower_unchecked(original.lower().map(<[i64]>::to_vec));
    if !work.all_spanning() {
        return Err(internal("engine stopped before every forest was spanning"));
    }
    for a in 0..work.l() {
        let have = work.part_root_degree(a) as i64;
        if original.lower().is_some_and(|c| have < c[a])
            || original.upper().is_some_and(|c| have > c[a])
        {
            return Err(internal(format!("part {a} ended outside its bounds")));
        }
    }
    Ok(AugmentResult::Completed(Completion {
        state: work,
        steps,
        stats,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{Digraph, RootedInstance};
    use crate::oracles::ConditionId;

    fn state(n: usize, arcs: &[(usize, usize)], k: usize) -> ForestState {
        let d = Digraph::new(n, arcs.iter().copied()).unwrap();
        let inst = RootedInstance::new(d, 0).unwrap();
        ForestState::new(inst, vec![ArcSet::new(); k]).unwrap()
    }

    fn cfg() -> AugmentConfig {
        AugmentConfig::default()
    }

    #[test]
    fn completion_examples() {
        // x = 0, a = 1, b = 2
        let s = state(3, &[(0, 1), (1, 2)], 1);
        let out = complete_to_spanning(&s, &s.residual(), &cfg()).unwrap();
        let done = out.completion().unwrap();
        assert_eq!(done.forests()[0], ArcSet::from_ids([0, 1]));
        assert_eq!(
            done.steps,
            vec![
                StepAction::AddRootArc { forest: 0, arc: 0 },
                StepAction::AddInternalArc { forest: 0, arc: 1 }
            ]
        );

        let spanning = done.state.clone();
        let again = complete_to_spanning(&spanning, &spanning.residual(), &cfg()).unwrap();
        assert!(again.completion().unwrap().steps.is_empty());

        let s = state(2, &[], 1);
        let cert = complete_to_spanning(&s, &ArcSet::new(), &cfg()).unwrap();
        assert_eq!(cert.certificate().unwrap().condition, ConditionId::Cond11);
    }

    #[test]
    fn lower_examples() {
        // two parallel root arcs, both forests in one part needing 2 roots
        let s = state(2, &[(0, 1), (0, 1)], 2)
            .with_partition(vec![vec![0, 1]])
            .unwrap()
            .with_lower(vec![2])
            .unwrap();
        let out = augment_lower(&s, &cfg()).unwrap();
        let done = out.completion().unwrap();
        assert_eq!(done.state.part_root_degree(0), 2);

        let s = state(2, &[(0, 1)], 1).with_lower(vec![2]).unwrap();
        let out = augment_lower(&s, &cfg()).unwrap();
        let cert = out.certificate().unwrap();
        assert_eq!(cert.condition, ConditionId::Cond4);
        assert!(cert.family.is_empty());
    }

    #[test]
    fn upper_examples() {
        let s = state(3, &[(0, 1), (0, 2), (1, 2)], 1)
            .with_upper(vec![1])
            .unwrap();
        let out = augment_upper(&s, &cfg()).unwrap();
        let done = out.completion().unwrap();
        assert_eq!(done.forests()[0], ArcSet::from_ids([0, 2]));
        assert_eq!(done.state.upper(), Some(&[1][..]));
        assert_eq!(replay(&s, &done.steps).unwrap(), done.state);

        let s = state(3, &[(0, 1), (0, 2)], 1).with_upper(vec![1]).unwrap();
        let out = augment_upper(&s, &cfg()).unwrap();
        assert_eq!(out.certificate().unwrap().condition, ConditionId::Cond22);
    }

    #[test]
    fn both_examples() {
        let s = state(3, &[(0, 1), (0, 2), (1, 2), (2, 1)], 1)
            .with_lower(vec![2])
            .unwrap()
            .with_upper(vec![2])
            .unwrap();
        let out = augment_both(&s, &cfg()).unwrap();
        let done = out.completion().unwrap();
        assert_eq!(done.state.part_root_degree(0), 2);
        assert_eq!(replay(&s, &done.steps).unwrap(), done.state);
    }

    #[test]
    fn input_state_is_untouched() {
        let s = state(3, &[(0, 1), (1, 2)], 1);
        let before = s.clone();
        let _ = complete_to_spanning(&s, &s.residual(), &cfg()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn preconditions_are_enforced() {
        let s = state(2, &[(0, 1)], 1);
        assert!(augment_lower(&s, &cfg()).is_err());
        assert!(augment_upper(&s, &cfg()).is_err());
        let used = ForestState::new(s.instance().clone(), vec![ArcSet::from_ids([0])]).unwrap();
        assert!(complete_to_spanning(&used, &ArcSet::from_ids([0]), &cfg()).is_err());
    }
}
