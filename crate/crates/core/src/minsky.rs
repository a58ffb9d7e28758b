//! Reversible deterministic two-counter Minsky machines and their encoding
//! as a rewrite system whose cap problem simulates the machine.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rewrite::{Rule, Trs};
use crate::term::{iterate_unary, Name, Signature, Term};

/// What a transition does to its counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Action {
    /// Enabled when the counter is zero.
    Zero,
    /// Enabled when the counter is positive.
    Positive,
    Nop,
    Inc,
    /// Enabled when the counter is positive.
    Dec,
}

impl Action {
    pub fn parse(s: &str) -> Option<Action> {
        Some(match s {
            "Z" => Action::Zero,
            "P" => Action::Positive,
            "0" => Action::Nop,
            "+" => Action::Inc,
            "-" | "−" => Action::Dec,
            _ => return None,
        })
    }

    fn is_test(self) -> bool {
        matches!(self, Action::Zero | Action::Positive)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Zero => "Z",
            Action::Positive => "P",
            Action::Nop => "0",
            Action::Inc => "+",
            Action::Dec => "-",
        })
    }
}

/// `[from, counter, action, to]`, with `counter` 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub from: Name,
    pub counter: u8,
    pub action: Action,
    pub to: Name,
}

impl Transition {
    pub fn new(from: &str, counter: u8, action: Action, to: &str) -> Self {
        Transition {
            from: from.into(),
            counter,
            action,
            to: to.into(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.from, self.counter, self.action, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Machine {
    pub states: Vec<Name>,
    pub initial: Name,
    pub final_state: Name,
    pub transitions: Vec<Transition>,
}

impl Machine {
    /// Checks that every state mentioned is declared and counters are 1 or 2.
    pub fn new(states: Vec<Name>, initial: Name, final_state: Name, transitions: Vec<Transition>) -> Result<Self> {
        let declared: BTreeSet<&Name> = states.iter().collect();
        if declared.len() != states.len() {
            return Err(Error::InvalidMachine("a state is declared twice".into()));
        }
        for q in [&initial, &final_state] {
            if !declared.contains(q) {
                return Err(Error::InvalidMachine(format!("state {q} is not declared")));
            }
        }
        for t in &transitions {
            for q in [&t.from, &t.to] {
                if !declared.contains(q) {
                    return Err(Error::InvalidMachine(format!("{t}: state {q} is not declared")));
                }
            }
            if !(1..=2).contains(&t.counter) {
                return Err(Error::InvalidMachine(format!("{t}: counter must be 1 or 2")));
            }
        }
        Ok(Machine {
            states,
            initial,
            final_state,
            transitions,
        })
    }
}

/// First pair of distinct transitions sharing a source or a target without
/// being a zero/positive test of the same counter.
pub fn validate_machine(m: &Machine) -> Option<(usize, usize)> {
    let ts = &m.transitions;
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let (a, b) = (&ts[i], &ts[j]);
            if a.from == b.from || a.to == b.to {
                let split = a.counter == b.counter && a.action.is_test() && b.action.is_test() && a.action != b.action;
                if !split {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Config {
    pub state: Name,
    pub c1: u64,
    pub c2: u64,
    pub steps: u64,
}

impl Config {
    pub fn start(m: &Machine, c1: u64, c2: u64) -> Self {
        Config {
            state: m.initial.clone(),
            c1,
            c2,
            steps: 0,
        }
    }

    fn counter(&self, j: u8) -> u64 {
        if j == 1 {
            self.c1
        } else {
            self.c2
        }
    }

    /// `c(q, s^c1(0), s^c2(0), s^steps(0))`.
    pub fn to_term(&self) -> Term {
        let n = |k: u64| iterate_unary(SUCC, k as usize, Term::constant(ZERO));
        Term::app(
            CONFIG,
            vec![Term::constant(&self.state), n(self.c1), n(self.c2), n(self.steps)],
        )
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}) after {} steps",
            self.state, self.c1, self.c2, self.steps
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stop {
    Final,
    /// No transition is enabled outside the final state.
    Stuck,
    StepLimit,
    Overflow,
}

#[derive(Debug, Clone, Serialize)]
pub struct Run {
    /// Every configuration visited, starting with the initial one.
    pub configs: Vec<Config>,
    /// Index of the transition taken at each step.
    pub fired: Vec<usize>,
    pub stop: Stop,
}

impl Run {
    pub fn halted(&self) -> bool {
        self.stop == Stop::Final
    }

    pub fn last(&self) -> &Config {
        self.configs.last().expect("start configuration")
    }

    pub fn len(&self) -> usize {
        self.fired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fired.is_empty()
    }
}

/// Runs `m` until it reaches its final state, gets stuck, or `max_steps`
/// moves were made. Decrementing a zero counter is not enabled.
pub fn simulate(m: &Machine, start: Config, max_steps: usize) -> Run {
    let mut cur = start;
    let mut configs = Vec::new();
    let mut fired = Vec::new();
    let stop = loop {
        if cur.state == m.final_state {
            break Stop::Final;
        }
        if fired.len() >= max_steps {
            break Stop::StepLimit;
        }
        let enabled = m.transitions.iter().position(|t| {
            t.from == cur.state
                && match t.action {
                    Action::Zero => cur.counter(t.counter) == 0,
                    Action::Positive | Action::Dec => cur.counter(t.counter) > 0,
                    Action::Nop | Action::Inc => true,
                }
        });
        let Some(i) = enabled else { break Stop::Stuck };
        let t = &m.transitions[i];
        let mut next = cur.clone();
        let c = if t.counter == 1 { &mut next.c1 } else { &mut next.c2 };
        match t.action {
            Action::Inc => match c.checked_add(1) {
                Some(v) => *c = v,
                None => break Stop::Overflow,
            },
            Action::Dec => *c -= 1,
            _ => {}
        }
        next.state = t.to.clone();
        next.steps += 1;
        configs.push(std::mem::replace(&mut cur, next));
        fired.push(i);
    };
    configs.push(cur);
    Run { configs, fired, stop }
}

pub const CONFIG: &str = "c";
pub const SUCC: &str = "s";
pub const ZERO: &str = "0";
pub const HALT_MARK: &str = "g";
pub const COUNT_DOWN: &str = "g'";
pub const END_STATE: &str = "e";
pub const HOLE: &str = "◇";
pub const HALT_RULE: &str = "init_halt";
pub const COUNT_RULE: &str = "init_count";

pub fn step_symbol(state: &str) -> Name {
    format!("f_{state}").into()
}

pub fn zero_step_symbol(state: &str) -> Name {
    format!("fp_{state}").into()
}

/// A theory, the intruder's ground knowledge and the goal term.
#[derive(Debug, Clone)]
pub struct CapInstance {
    pub theory: Trs,
    pub knowledge: Vec<Term>,
    pub goal: Term,
    /// Duplicate rules dropped during encoding.
    pub warnings: Vec<String>,
}

/// The goal of every encoded instance, `c(e,0,0,0)`.
pub fn goal_term() -> Term {
    let z = Term::constant(ZERO);
    Term::app(CONFIG, vec![Term::constant(END_STATE), z.clone(), z.clone(), z])
}

/// Builds the rewrite system for `m` started with counters `(k, p)` whose
/// halting configuration has counters `(kp, pp)`. The theory carries the
/// precedence proving its termination.
pub fn encode(m: &Machine, k: u64, p: u64, kp: u64, pp: u64) -> Result<CapInstance> {
    if let Some((i, j)) = validate_machine(m) {
        return Err(Error::InvalidMachine(format!(
            "transitions {} and {} violate reversible determinism",
            m.transitions[i], m.transitions[j]
        )));
    }
    if let Some(t) = m.transitions.iter().find(|t| t.from == m.final_state) {
        return Err(Error::InvalidMachine(format!("{t} leaves the final state")));
    }
    let reserved: BTreeSet<Name> = [CONFIG, SUCC, ZERO, HALT_MARK, COUNT_DOWN, END_STATE]
        .into_iter()
        .map(Name::from)
        .chain(m.states.iter().flat_map(|q| [step_symbol(q), zero_step_symbol(q)]))
        .collect();
    if let Some(q) = m.states.iter().find(|q| reserved.contains(*q)) {
        return Err(Error::InvalidMachine(format!(
            "state name {q} clashes with an encoding symbol"
        )));
    }

    let mut sig = Signature::new();
    for q in &m.states {
        sig.declare(&step_symbol(q), 1)?;
        sig.declare(&zero_step_symbol(q), 1)?;
        sig.declare(q, 0)?;
    }
    for (f, n) in [
        (CONFIG, 4),
        (SUCC, 1),
        (ZERO, 0),
        (HALT_MARK, 1),
        (COUNT_DOWN, 1),
        (END_STATE, 0),
    ] {
        sig.declare(f, n)?;
    }

    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    let s = |t: Term| Term::app(SUCC, vec![t]);
    let zero = || Term::constant(ZERO);
    let num = |n: u64| iterate_unary(SUCC, n as usize, zero());
    let conf = |q: &str, a: Term, b: Term, c: Term| Term::app(CONFIG, vec![Term::constant(q), a, b, c]);
    let un = |f: &Name, t: Term| Term::app(f, vec![t]);

    let fl = step_symbol(&m.final_state);
    let mut rules = vec![
        Rule::new(
            HALT_RULE,
            un(&fl, conf(&m.final_state, num(kp), num(pp), z.clone())),
            Term::app(HALT_MARK, vec![conf(END_STATE, zero(), zero(), z.clone())]),
        ),
        Rule::new(
            COUNT_RULE,
            Term::app(
                COUNT_DOWN,
                vec![Term::app(
                    HALT_MARK,
                    vec![conf(END_STATE, zero(), zero(), s(z.clone()))],
                )],
            ),
            conf(END_STATE, zero(), zero(), z.clone()),
        ),
    ];
    let mut warnings = Vec::new();
    for (i, t) in m.transitions.iter().enumerate() {
        let (qi, qj) = (&*t.from, &*t.to);
        // (lhs counters, rhs counters) for the tested counter; the other one is free
        let (pre, post) = match t.action {
            Action::Positive => (s(x.clone()), s(x.clone())),
            Action::Zero => (zero(), zero()),
            Action::Nop => (x.clone(), x.clone()),
            Action::Inc => (x.clone(), s(x.clone())),
            Action::Dec => (s(x.clone()), x.clone()),
        };
        let (l_args, r_args) = if t.counter == 1 {
            ((pre, y.clone()), (post, y.clone()))
        } else {
            let sw = |t: Term| t.map_vars(&mut |v| Term::var(if &**v == "x" { "y" } else { v }));
            ((x.clone(), sw(pre)), (x.clone(), sw(post)))
        };
        let f = if t.action == Action::Zero {
            zero_step_symbol(qi)
        } else {
            step_symbol(qi)
        };
        let rule = Rule::new(
            format!("t{}", i + 1),
            un(&f, conf(qi, l_args.0, l_args.1, z.clone())),
            conf(qj, r_args.0, r_args.1, s(z.clone())),
        );
        if let Some(dup) = rules.iter().find(|r| r.lhs == rule.lhs && r.rhs == rule.rhs) {
            warnings.push(format!("{t} duplicates rule {}; dropped", dup.label));
            continue;
        }
        rules.push(rule);
    }
    let mut theory = Trs::new(sig, ["x", "y", "z"].map(Name::from).into(), rules)?;
    theory.precedence = Some(encoding_precedence(m));
    let knowledge = vec![conf(&m.initial, num(k), num(p), zero())];
    Ok(CapInstance {
        theory,
        knowledge,
        goal: goal_term(),
        warnings,
    })
}

/// Runs the machine first and encodes it with the halting counters found.
pub fn encode_from_run(m: &Machine, k: u64, p: u64, max_steps: usize) -> Result<(CapInstance, Run)> {
    let run = simulate(m, Config::start(m, k, p), max_steps);
    if !run.halted() {
        return Err(Error::RunNotHalted);
    }
    let last = run.last();
    Ok((encode(m, k, p, last.c1, last.c2)?, run))
}

/// Step symbols of non-final states, then their zero-test variants, the
/// final step symbol, `g ≻ g' ≻ c ≻ s`, the states, `e` and `0`.
pub fn encoding_precedence(m: &Machine) -> Vec<Name> {
    let inner = || m.states.iter().filter(|q| **q != m.final_state);
    let mut order: Vec<Name> = inner().map(|q| step_symbol(q)).collect();
    order.extend(m.states.iter().map(|q| zero_step_symbol(q)));
    order.push(step_symbol(&m.final_state));
    order.extend([HALT_MARK, COUNT_DOWN, CONFIG, SUCC].map(Name::from));
    order.extend(m.states.iter().cloned());
    order.extend([END_STATE, ZERO].map(Name::from));
    order
}

/// `(g'∘g)^(n-1)(g'(f_L(f*_n(…f*_1(◇)))))` for a run halting after n ≥ 1
/// steps, where `f*_j` is the zero-test symbol when step j tested for zero.
pub fn canonical_cap(m: &Machine, run: &Run) -> Result<Term> {
    if !run.halted() || run.is_empty() {
        return Err(Error::RunNotHalted);
    }
    let mut t = Term::var(HOLE);
    for &i in &run.fired {
        let tr = &m.transitions[i];
        let f = if tr.action == Action::Zero {
            zero_step_symbol(&tr.from)
        } else {
            step_symbol(&tr.from)
        };
        t = Term::app(&f, vec![t]);
    }
    t = Term::app(&step_symbol(&m.final_state), vec![t]);
    t = Term::app(COUNT_DOWN, vec![t]);
    for _ in 1..run.len() {
        t = Term::app(COUNT_DOWN, vec![Term::app(HALT_MARK, vec![t])]);
    }
    Ok(t)
}

/// Substitutes knowledge terms for holes: `◇` is the first knowledge term,
/// `◇i` the i-th.
pub fn plug(cap: &Term, knowledge: &[Term]) -> Term {
    cap.map_vars(&mut |v| {
        let idx = v
            .strip_prefix(HOLE)
            .map(|rest| if rest.is_empty() { Some(1) } else { rest.parse().ok() });
        match idx {
            Some(Some(i)) if (1..=knowledge.len()).contains(&i) => knowledge[i - 1].clone(),
            _ => Term::Var(v.clone()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny() -> Machine {
        Machine::new(
            vec!["q0".into(), "q1".into(), "qL".into()],
            "q0".into(),
            "qL".into(),
            vec![
                Transition::new("q0", 1, Action::Inc, "q1"),
                Transition::new("q1", 1, Action::Inc, "qL"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_machine(&tiny()), None);
        let states = vec!["q0".into(), "q1".into(), "q2".into()];
        let split = Machine::new(
            states.clone(),
            "q0".into(),
            "q2".into(),
            vec![
                Transition::new("q0", 1, Action::Zero, "q1"),
                Transition::new("q0", 1, Action::Positive, "q2"),
            ],
        )
        .unwrap();
        assert_eq!(validate_machine(&split), None);
        let fork = Machine::new(
            states,
            "q0".into(),
            "q2".into(),
            vec![
                Transition::new("q0", 1, Action::Inc, "q1"),
                Transition::new("q0", 2, Action::Inc, "q2"),
            ],
        )
        .unwrap();
        assert_eq!(validate_machine(&fork), Some((0, 1)));
    }

    #[test]
    fn tiny_machine_run_and_encoding() {
        let m = tiny();
        let run = simulate(&m, Config::start(&m, 0, 0), 100);
        assert!(run.halted());
        assert_eq!(run.len(), 2);
        assert_eq!(run.last().to_term().to_string(), "c(qL,s(s(0)),0,s(s(0)))");
        let inst = encode(&m, 0, 0, 2, 0).unwrap();
        let rules: Vec<String> = inst.theory.rules().iter().map(|r| r.to_string()).collect();
        assert_eq!(
            rules,
            [
                "f_qL(c(qL,s(s(0)),0,z)) -> g(c(e,0,0,z))",
                "g'(g(c(e,0,0,s(z)))) -> c(e,0,0,z)",
                "f_q0(c(q0,x,y,z)) -> c(q1,s(x),y,s(z))",
                "f_q1(c(q1,x,y,z)) -> c(qL,s(x),y,s(z))",
            ]
        );
        let cap = canonical_cap(&m, &run).unwrap();
        assert_eq!(cap.to_string(), "g'(g(g'(f_qL(f_q1(f_q0(◇))))))");
        let nf = inst.theory.normal_form(&plug(&cap, &inst.knowledge), 100).unwrap();
        assert_eq!(nf, inst.goal);
    }

    #[test]
    fn start_in_final_state_is_an_empty_halted_run() {
        let m = tiny();
        let mut start = Config::start(&m, 0, 0);
        start.state = "qL".into();
        let run = simulate(&m, start, 10);
        assert!(run.halted() && run.is_empty());
        assert!(matches!(canonical_cap(&m, &run), Err(Error::RunNotHalted)));
    }

    #[test]
    fn loops_hit_the_step_limit() {
        let m = Machine::new(
            vec!["q0".into(), "qL".into()],
            "q0".into(),
            "qL".into(),
            vec![Transition::new("q0", 1, Action::Nop, "q0")],
        )
        .unwrap();
        let run = simulate(&m, Config::start(&m, 0, 0), 7);
        assert_eq!(run.stop, Stop::StepLimit);
        assert_eq!(run.len(), 7);
    }

    #[test]
    fn second_counter_rules_use_y() {
        let m = Machine::new(
            vec!["q0".into(), "qL".into()],
            "q0".into(),
            "qL".into(),
            vec![Transition::new("q0", 2, Action::Dec, "qL")],
        )
        .unwrap();
        let inst = encode(&m, 0, 1, 0, 0).unwrap();
        assert_eq!(
            inst.theory.rules()[2].to_string(),
            "f_q0(c(q0,x,s(y),z)) -> c(qL,x,y,s(z))"
        );
    }
}
