//! The solving loop: a depth-first search over proof branches, each refined
//! by priority-scheduled inference rules until it closes, grounds out, or
//! the search runs into a resource cap.
//!
//! Entry point: [`solve`]. Callers hand in the worked formula (normally the
//! preprocessed form), the formula models must be checked against, and a
//! [`SolverConfig`]. The result is a [`Verdict`] plus the recorded trace:
//!
//! - [`Verdict::Sat`] carries a [`Model`] that has passed concrete
//!   re-evaluation of the caller's formula;
//! - [`Verdict::Unsat`] means every branch closed and no step lost
//!   information along the way;
//! - [`Verdict::Unknown`] reports the reason: a step or time cap, or an
//!   over-approximation that left closure unproven.

mod goal;
mod rules;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use crate::automata::AutomatonDb;
use crate::ir::{Formula, Interner, Value, VarId};

use goal::{Ground, ProofGoal, SolveEnv, Split, Tracer};
use rules::Applied;

/// Scoring weights for the rule scheduler. The score of an application is
/// computed once at enqueue time:
///
/// ```text
/// score = ground bonus
///       − universal-input penalty (backward rules with nothing to pull)
///       − inexact-image penalty  (forward rules that over-approximate)
///       − automata_cost × involved automaton states
///       − aging × queue age at enqueue
/// ```
///
/// The aging term makes later enqueues score ever lower, so an entry that
/// has waited longer always overtakes newcomers of equal static score: no
/// enqueued application starves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    /// Bonus when an argument or result of the application is concrete.
    pub ground: i64,
    /// Penalty for pulling through an unconstrained (universal) output.
    pub universal_backward: i64,
    /// Penalty for pushing an image that is not exact.
    pub inexact_forward: i64,
    /// Cost per automaton state involved in the application.
    pub automata_cost: i64,
    /// How strongly queue age discounts newcomers.
    pub aging: i64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            ground: 1000,
            universal_backward: 300,
            inexact_forward: 300,
            automata_cost: 1,
            aging: 10,
        }
    }
}

/// Knobs for one `solve` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Push argument languages through definitions (images).
    pub forward: bool,
    /// Pull output languages back onto arguments (pre-images).
    pub backward: bool,
    /// Enable head-alignment splits for pairs of concatenations.
    pub nielsen: bool,
    /// Eagerly merge a variable's memberships into one automaton.
    pub eager: bool,
    /// Maximum number of rule applications and case splits.
    pub step_cap: u64,
    /// Wall-clock budget in milliseconds, if any.
    pub time_cap_ms: Option<u64>,
    /// Automaton size ceiling for product constructions.
    pub state_cap: usize,
    /// Record a trace event per effectful rule application.
    pub trace: bool,
    pub weights: Weights,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            forward: true,
            backward: true,
            nielsen: false,
            eager: true,
            step_cap: 100_000,
            time_cap_ms: None,
            state_cap: 10_000,
            trace: false,
            weights: Weights::default(),
        }
    }
}

/// A configuration the solver cannot run with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl SolverConfig {
    /// Rejects configurations that disable every propagation direction.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.forward && !self.backward {
            return Err(ConfigError(
                "at least one of forward and backward propagation must be enabled".to_string(),
            ));
        }
        Ok(())
    }
}

/// Why a run ended without a definite answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    /// The step cap was exhausted.
    StepLimit,
    /// The wall-clock budget was exhausted.
    TimeLimit,
    /// Some step over-approximated or was skipped, so a full closure no
    /// longer proves unsatisfiability, and no verified model was found.
    Incomplete,
}

/// A satisfying assignment for the user-declared variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub values: BTreeMap<VarId, Value>,
}

impl Model {
    pub fn get(&self, v: VarId) -> Option<&Value> {
        self.values.get(&v)
    }
}

/// Final answer of a `solve` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Model),
    Unsat,
    Unknown(UnknownReason),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sat(_) => write!(f, "sat"),
            Verdict::Unsat => write!(f, "unsat"),
            Verdict::Unknown(_) => write!(f, "unknown"),
        }
    }
}

/// One effectful rule application, as recorded when tracing is on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    /// Stable rule tag, e.g. `forward` or `close`.
    pub rule: &'static str,
    /// Human-readable description of what the rule acted on.
    pub target: String,
    /// Score the application was scheduled with.
    pub priority: i64,
    /// Branch the application ran on.
    pub branch: u64,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule={} target={} priority={} branch={}",
            self.rule, self.target, self.priority, self.branch
        )
    }
}

/// Everything a `solve` call produced.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    pub trace: Vec<TraceEvent>,
    pub steps: u64,
}

/// Decides `goal_f`. Any model found is verified against `original`, which
/// should be the formula as it stood before rewriting; a candidate that
/// fails that check is discarded and the run degrades to `Unknown` instead
/// of ever reporting it.
pub fn solve(
    goal_f: &Formula,
    original: &Formula,
    intern: &mut Interner,
    db: &mut AutomatonDb,
    cfg: &SolverConfig,
) -> SolveOutcome {
    let mut env = SolveEnv::new(intern, db, cfg.state_cap);
    let mut tr = Tracer::new(cfg.trace);
    let mut root = ProofGoal::new(0);
    root.install_formula(goal_f, &mut env, true);

    let mut stack: Vec<ProofGoal> = vec![root];
    let mut steps: u64 = 0;
    let mut compromised = false;
    let mut capped: Option<UnknownReason> = None;
    let mut next_branch: u64 = 1;
    let t0 = Instant::now();

    'next_branch: while let Some(mut g) = stack.pop() {
        g.sweep(&mut env, cfg, &mut tr);
        loop {
            if g.closed {
                if g.taint {
                    compromised = true;
                }
                continue 'next_branch;
            }
            if steps >= cfg.step_cap {
                capped = Some(UnknownReason::StepLimit);
                break 'next_branch;
            }
            if let Some(ms) = cfg.time_cap_ms {
                if t0.elapsed().as_millis() as u64 >= ms {
                    capped = Some(UnknownReason::TimeLimit);
                    break 'next_branch;
                }
            }
            match g.evaluate_if_ground(original, &env) {
                Ground::Sat(m) => {
                    return SolveOutcome {
                        verdict: Verdict::Sat(m),
                        trace: tr.events,
                        steps,
                    };
                }
                Ground::Refuted => {
                    if g.taint {
                        compromised = true;
                    }
                    continue 'next_branch;
                }
                Ground::VerifyFailed => {
                    compromised = true;
                    continue 'next_branch;
                }
                Ground::NotGround => {}
            }
            if let Some(q) = g.pop_rule() {
                steps += 1;
                g.age += 1;
                match rules::apply(&q.app, &mut g, &mut env, cfg, &mut tr) {
                    Applied::Progress => {
                        tr.emit(q.app.tag(), g.branch, q.priority, || q.app.target(env.intern));
                        g.sweep(&mut env, cfg, &mut tr);
                    }
                    Applied::NoChange => {}
                    Applied::Children(mut children) => {
                        tr.emit(q.app.tag(), g.branch, q.priority, || q.app.target(env.intern));
                        for c in children.iter_mut() {
                            c.branch = next_branch;
                            next_branch += 1;
                        }
                        stack.extend(children.into_iter().rev());
                        continue 'next_branch;
                    }
                    Applied::Skipped { mark } => {
                        if mark {
                            g.taint = true;
                        }
                    }
                    Applied::Closed => {
                        tr.emit(q.app.tag(), g.branch, q.priority, || q.app.target(env.intern));
                        g.close();
                    }
                }
            } else {
                steps += 1;
                match g.next_split(&mut env, &mut tr) {
                    Split::Children(mut children) => {
                        for c in children.iter_mut() {
                            c.branch = next_branch;
                            next_branch += 1;
                        }
                        stack.extend(children.into_iter().rev());
                        continue 'next_branch;
                    }
                    Split::ClosedNow => {
                        if g.taint {
                            compromised = true;
                        }
                        continue 'next_branch;
                    }
                    Split::Stuck => {
                        // Nothing left to refine or split on, yet not ground:
                        // abandon the branch without claiming closure.
                        compromised = true;
                        continue 'next_branch;
                    }
                }
            }
        }
    }

    let verdict = match capped {
        Some(reason) => Verdict::Unknown(reason),
        None if compromised => Verdict::Unknown(UnknownReason::Incomplete),
        None => Verdict::Unsat,
    };
    SolveOutcome {
        verdict,
        trace: tr.events,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::{Command, Sort};
    use crate::frontend::parser::parse_script;
    use crate::ir::{self, NormalizeCx, VarSort};
    use crate::rewriter;
    use crate::strings::SmtString;

    struct Lowered {
        worked: Formula,
        original: Formula,
        intern: Interner,
        db: AutomatonDb,
    }

    /// Runs the standard pipeline over a script's declarations and
    /// assertions: parse, lower each assertion, merge duplicate
    /// applications, preprocess.
    fn lower(text: &str, state_cap: usize) -> Lowered {
        let script = parse_script(text).expect("script must parse");
        let mut intern = Interner::new();
        let mut db = AutomatonDb::new();
        let mut parts: Vec<Formula> = Vec::new();
        for cmd in &script.commands {
            match cmd {
                Command::DeclareFun(name, sort) => {
                    let vs = match sort {
                        Sort::Str => VarSort::Str,
                        Sort::Int => VarSort::Int,
                        other => panic!("cannot declare a variable of sort {other:?}"),
                    };
                    intern.declare(name, vs).expect("duplicate declaration");
                }
                Command::Assert(t) => {
                    let mut cx = NormalizeCx::new(&mut intern, &mut db, state_cap);
                    let f = ir::normalize(t, &mut cx).expect("assertion must lower");
                    parts.extend(cx.drain_global());
                    parts.push(f);
                }
                _ => {}
            }
        }
        let original = Formula::and(parts);
        let compact = ir::cse(&original, &intern);
        let mut cx = NormalizeCx::new(&mut intern, &mut db, state_cap);
        let worked = rewriter::preprocess(&compact, &mut cx).expect("preprocess must succeed");
        Lowered {
            worked,
            original,
            intern,
            db,
        }
    }

    fn run(text: &str, cfg: &SolverConfig) -> (SolveOutcome, Interner) {
        let mut l = lower(text, cfg.state_cap);
        let out = solve(&l.worked, &l.original, &mut l.intern, &mut l.db, cfg);
        (out, l.intern)
    }

    fn model_str(m: &Model, intern: &Interner, name: &str) -> SmtString {
        let v = intern.lookup(name).expect("declared variable");
        match m.get(v) {
            Some(Value::Str(w)) => w.clone(),
            other => panic!("expected a string for {name}, got {other:?}"),
        }
    }

    fn traced(cfg: &SolverConfig) -> SolverConfig {
        SolverConfig {
            trace: true,
            ..cfg.clone()
        }
    }

    #[test]
    fn forward_image_closes_disjoint_concatenation() {
        let text = r#"
            (declare-fun x () String)
            (declare-fun y () String)
            (declare-fun z () String)
            (assert (str.in_re x (re.+ (str.to_re "a"))))
            (assert (str.in_re y (re.+ (str.to_re "b"))))
            (assert (= z (str.++ x y)))
            (assert (str.in_re z (re.+ (str.to_re "c"))))
        "#;
        let cfg = traced(&SolverConfig {
            backward: false,
            ..SolverConfig::default()
        });
        let (out, _) = run(text, &cfg);
        assert_eq!(out.verdict, Verdict::Unsat);
        assert!(
            out.trace.iter().any(|e| e.rule == "forward"),
            "expected a forward image step in {:#?}",
            out.trace
        );
    }

    #[test]
    fn backward_split_of_known_output_finds_model() {
        let text = r#"
            (declare-fun x () String)
            (declare-fun y () String)
            (assert (= "ab" (str.++ x y)))
        "#;
        let cfg = traced(&SolverConfig {
            forward: false,
            ..SolverConfig::default()
        });
        let (out, intern) = run(text, &cfg);
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?}", out.verdict);
        };
        let x = model_str(m, &intern, "x");
        let y = model_str(m, &intern, "y");
        assert_eq!(x.concat(&y), SmtString::from("ab"));
        assert!(out.trace.iter().any(|e| e.rule == "backward"));
    }

    #[test]
    fn length_bound_alone_grounds_via_cut() {
        let text = r#"
            (declare-fun x () String)
            (assert (= (str.len x) 2))
        "#;
        let cfg = traced(&SolverConfig::default());
        let (out, intern) = run(text, &cfg);
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?}", out.verdict);
        };
        assert_eq!(model_str(m, &intern, "x").len(), 2);
    }

    #[test]
    fn length_window_against_periodic_language_is_unsat() {
        let text = r#"
            (declare-fun x () String)
            (assert (= (str.len x) 2))
            (assert (str.in_re x (re.* (str.to_re "abc"))))
        "#;
        let (out, _) = run(text, &SolverConfig::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn alignment_splits_solve_a_commutation_equation() {
        // x·"a" = "a"·x with |x| = 2 forces x = "aa".
        let text = r#"
            (declare-fun x () String)
            (assert (= (str.++ x "a") (str.++ "a" x)))
            (assert (= (str.len x) 2))
        "#;
        let cfg = traced(&SolverConfig {
            forward: false,
            nielsen: true,
            step_cap: 5_000,
            ..SolverConfig::default()
        });
        let (out, intern) = run(text, &cfg);
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?} after {} steps", out.verdict, out.steps);
        };
        assert_eq!(model_str(m, &intern, "x"), SmtString::from("aa"));
        assert!(out.trace.iter().any(|e| e.rule == "nielsen"));
    }

    #[test]
    fn commutation_step_probe() {
        for k in [2u32, 8, 16, 32, 64] {
            let text = format!(
                r#"
                (declare-fun x () String)
                (assert (= (str.++ x "a") (str.++ "a" x)))
                (assert (= (str.len x) {k}))
            "#
            );
            for (label, nielsen, forward) in
                [("+F+B-N", false, true), ("-F+B+N", true, false)]
            {
                let cfg = SolverConfig {
                    nielsen,
                    forward,
                    step_cap: 200_000,
                    ..SolverConfig::default()
                };
                let (out, _) = run(&text, &cfg);
                eprintln!("k={k} {label}: {:?} steps={}", out.verdict, out.steps);
            }
        }
        panic!("probe only");
    }

    #[test]
    fn inexact_image_downgrades_closure_to_unknown() {
        // The replacement pattern stays symbolic long enough for the image
        // step to over-approximate; afterwards every branch closes, but the
        // run must not claim unsatisfiability.
        let text = r#"
            (declare-fun x () String)
            (declare-fun p () String)
            (declare-fun y () String)
            (assert (= y (str.replace x p "b")))
            (assert (str.in_re x (str.to_re "a")))
            (assert (str.in_re y (str.to_re "c")))
            (assert (str.in_re p (re.union (str.to_re "a") (str.to_re "b"))))
        "#;
        let (out, _) = run(text, &SolverConfig::default());
        assert_eq!(out.verdict, Verdict::Unknown(UnknownReason::Incomplete));
    }

    #[test]
    fn straight_line_chain_grounds_and_verifies() {
        let text = r#"
            (declare-fun x () String)
            (declare-fun y () String)
            (declare-fun z () String)
            (assert (= y (str.++ x "b")))
            (assert (= z (str.reverse y)))
            (assert (str.in_re x (re.+ (str.to_re "a"))))
        "#;
        let (out, intern) = run(text, &SolverConfig::default());
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?}", out.verdict);
        };
        let x = model_str(m, &intern, "x");
        let y = model_str(m, &intern, "y");
        let z = model_str(m, &intern, "z");
        assert_eq!(y, x.concat(&SmtString::from("b")));
        assert_eq!(z, y.reversed());
        assert!(x.len() >= 1);
    }

    #[test]
    fn trace_lines_carry_rule_target_priority_branch() {
        let text = r#"
            (declare-fun x () String)
            (assert (str.in_re x (str.to_re "ab")))
            (assert (str.in_re x (re.+ (str.to_re "a"))))
        "#;
        let cfg = traced(&SolverConfig::default());
        let (out, _) = run(text, &cfg);
        assert_eq!(out.verdict, Verdict::Unsat);
        assert!(!out.trace.is_empty());
        for e in &out.trace {
            let line = e.to_string();
            assert!(line.starts_with("rule="), "bad trace line {line}");
            assert!(line.contains(" target="));
            assert!(line.contains(" priority="));
            assert!(line.contains(" branch="));
        }
    }

    #[test]
    fn disabling_both_directions_is_rejected() {
        let cfg = SolverConfig {
            forward: false,
            backward: false,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn integer_reasoning_connects_to_int_and_lengths() {
        let text = r#"
            (declare-fun s () String)
            (declare-fun n () Int)
            (assert (= n (str.to_int s)))
            (assert (= n 7))
            (assert (= (str.len s) 1))
        "#;
        let (out, intern) = run(text, &SolverConfig::default());
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?}", out.verdict);
        };
        assert_eq!(model_str(m, &intern, "s"), SmtString::from("7"));
    }

    #[test]
    fn to_int_of_two_digit_window_excludes_leading_zero_only_when_forced() {
        // n = to_int(s), n = 7, |s| = 2 admits exactly "07".
        let text = r#"
            (declare-fun s () String)
            (declare-fun n () Int)
            (assert (= n (str.to_int s)))
            (assert (= n 7))
            (assert (= (str.len s) 2))
        "#;
        let (out, intern) = run(text, &SolverConfig::default());
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?}", out.verdict);
        };
        assert_eq!(model_str(m, &intern, "s"), SmtString::from("07"));
    }

    #[test]
    fn disequality_of_equal_constants_closes_taint_free() {
        let text = r#"
            (declare-fun x () String)
            (assert (= x "a"))
            (assert (not (= x "a")))
        "#;
        let (out, _) = run(text, &SolverConfig::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn children_of_a_split_are_explored_depth_first_in_order() {
        // The backward split of "ab" over a two-variable concatenation
        // explores the empty-prefix child first, so the reported model has
        // the empty head.
        let text = r#"
            (declare-fun x () String)
            (declare-fun y () String)
            (assert (= "ab" (str.++ x y)))
        "#;
        let cfg = SolverConfig {
            forward: false,
            ..SolverConfig::default()
        };
        let (out, intern) = run(text, &cfg);
        let Verdict::Sat(m) = &out.verdict else {
            panic!("expected sat, got {:?}", out.verdict);
        };
        assert_eq!(model_str(m, &intern, "x"), SmtString::empty());
        assert_eq!(model_str(m, &intern, "y"), SmtString::from("ab"));
    }
}
