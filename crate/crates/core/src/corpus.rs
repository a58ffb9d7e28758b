//! Named test systems, machines and a seeded generator of small random
//! systems.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::minsky::{encode_from_run, Machine};
use crate::parse::{parse_machine, parse_trs};
use crate::rewrite::{Rule, Trs};
use crate::subst::variant_key;
use crate::term::{Name, Signature, Term};

/// Hand-written systems as `(name, file text)`.
pub const SYSTEMS: &[(&str, &str)] = &[
    ("lemma", "sig: f/1 g/1 h/1\nvars: x\nrules:\n  f(g(h(x))) -> g(x)\n"),
    (
        "three_rules",
        "sig: f/2 i/1 g/1 b/0 c/0\nvars: x\nrules:\n  f(x,i(x)) -> g(x)\n  g(b) -> c\n  f(b,i(b)) -> c\n",
    ),
    (
        "three_rules_minus_one",
        "sig: f/2 i/1 g/1 b/0 c/0\nvars: x\nrules:\n  f(x,i(x)) -> g(x)\n  g(b) -> c\n",
    ),
    ("root_stable", "sig: f/2 0/0\nvars: x\nrules:\n  f(x,x) -> 0\n"),
    ("constant", "sig: a/0 b/0\nrules:\n  a -> b\n"),
    ("two_constants", "sig: a/0 b/0 c/0 d/0\nrules:\n  a -> b\n  c -> d\n"),
    (
        "unary_chain",
        "sig: f/1 g/1 h/1 a/0\nvars: x\nrules:\n  f(g(x)) -> h(x)\n",
    ),
    (
        "binary",
        "sig: f/2 g/1 h/2 a/0\nvars: x y\nrules:\n  f(g(x),y) -> h(x,y)\n",
    ),
    ("guarded", "sig: f/2 g/1 a/0 b/0\nvars: x\nrules:\n  f(a,x) -> g(x)\n"),
    ("swap", "sig: f/2 g/2 a/0\nvars: x y\nrules:\n  f(x,y) -> g(y,x)\n"),
    (
        "two_level",
        "sig: f/1 g/1 h/1 a/0 b/0\nvars: x\nrules:\n  f(g(x)) -> h(x)\n  h(a) -> b\n",
    ),
    (
        "two_level_closed",
        "sig: f/1 g/1 h/1 a/0 b/0\nvars: x\nrules:\n  f(g(x)) -> h(x)\n  h(a) -> b\n  f(g(a)) -> b\n",
    ),
    ("self_overlap", "sig: f/1 g/1\nvars: x\nrules:\n  f(f(x)) -> g(x)\n"),
    ("diverging", "sig: a/0 b/0 c/0\nrules:\n  a -> b\n  a -> c\n"),
    ("predecessor", "sig: p/1 s/1 0/0\nvars: x\nrules:\n  p(s(x)) -> x\n"),
    ("decrypt", "sig: d/2 e/2 k/0\nvars: x y\nrules:\n  d(e(x,y),y) -> x\n"),
    (
        "not_right_reduced",
        "sig: f/1 g/1 a/0 b/0\nvars: x\nrules:\n  f(x) -> g(a)\n  g(a) -> b\n",
    ),
    (
        "left_reducible",
        "sig: f/1 g/1 b/0 c/0 d/0\nrules:\n  f(g(b)) -> c\n  g(b) -> d\n  f(d) -> c\n",
    ),
    (
        "double",
        "sig: d/1 s/1 0/0\nvars: x\nrules:\n  d(0) -> 0\n  d(s(x)) -> s(s(d(x)))\n",
    ),
    (
        "addition",
        "sig: a/2 s/1 0/0\nvars: x y\nrules:\n  a(x,0) -> x\n  a(x,s(y)) -> s(a(x,y))\n",
    ),
    (
        "absorbing",
        "sig: f/1 g/1 h/1 k/1\nvars: x\nrules:\n  f(g(h(x))) -> g(x)\n  k(h(x)) -> h(x)\n",
    ),
    (
        "pairing",
        "sig: p/2 l/1 r/1 a/0 b/0\nvars: x y\nrules:\n  l(p(x,y)) -> r(p(y,x))\n",
    ),
];

/// Machines as `(name, file text, first counter, second counter)`.
pub const MACHINES: &[(&str, &str, u64, u64)] = &[
    (
        "tiny",
        "states: q0 q1 qL\ninitial: q0\nfinal: qL\nq0 1 + q1\nq1 1 + qL\n",
        0,
        0,
    ),
    (
        "branch_and_decrement",
        "states: q0 q1 q2 qL\ninitial: q0\nfinal: qL\nq0 1 P q1\nq1 1 - q2\nq2 2 + q0\nq0 1 Z qL\n",
        1,
        0,
    ),
    ("one_step", "states: q0 qL\ninitial: q0\nfinal: qL\nq0 1 + qL\n", 0, 0),
    (
        "second_counter",
        "states: q0 q1 q2 qL\ninitial: q0\nfinal: qL\nq0 2 + q1\nq1 2 - q2\nq2 1 0 qL\n",
        0,
        0,
    ),
    (
        "drain",
        "states: q0 q1 q2 qL\ninitial: q0\nfinal: qL\nq0 2 Z q1\nq0 2 P q2\nq2 2 - q0\nq1 1 + qL\n",
        0,
        2,
    ),
];

pub const MACHINE_STEPS: usize = 1000;

pub fn system(name: &str) -> Option<Trs> {
    SYSTEMS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_trs(src).expect("corpus system parses"))
}

pub fn machine(name: &str) -> Option<(Machine, u64, u64)> {
    MACHINES
        .iter()
        .find(|(n, ..)| *n == name)
        .map(|(_, src, k, p)| (parse_machine(src).expect("corpus machine parses"), *k, *p))
}

/// Every hand-written system followed by the encodings of every machine,
/// each encoded with the counters its run halts with.
pub fn corpus() -> Vec<(String, Trs)> {
    let mut out: Vec<(String, Trs)> = SYSTEMS
        .iter()
        .map(|(n, src)| (n.to_string(), parse_trs(src).expect("corpus system parses")))
        .collect();
    for (name, src, k, p) in MACHINES {
        let m = parse_machine(src).expect("corpus machine parses");
        let (inst, _) = encode_from_run(&m, *k, *p, MACHINE_STEPS).expect("corpus machine halts");
        out.push((format!("machine_{name}"), inst.theory));
    }
    out
}

/// Shape of generated systems.
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub max_rules: usize,
    pub max_symbols: usize,
    pub max_depth: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_rules: 4,
            max_symbols: 5,
            max_depth: 3,
        }
    }
}

/// Generates small variable-preserving systems whose right-hand sides are
/// not variables and whose rules are pairwise not variants. Deterministic in
/// `seed`.
pub struct RandomSystems {
    rng: ChaCha8Rng,
    spec: RandomSpec,
    pub seed: u64,
}

impl RandomSystems {
    pub fn new(seed: u64, spec: RandomSpec) -> Self {
        RandomSystems {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spec,
            seed,
        }
    }

    fn signature(&mut self) -> Vec<(Name, usize)> {
        let n = self.rng.gen_range(2..=self.spec.max_symbols);
        let mut names = ["f", "g", "h", "k", "a", "b", "c"].to_vec();
        names.shuffle(&mut self.rng);
        let mut sig: Vec<(Name, usize)> = names[..n]
            .iter()
            .map(|f| (Name::from(*f), self.rng.gen_range(0..=2)))
            .collect();
        sig[0].1 = 0;
        if sig.iter().all(|(_, a)| *a == 0) {
            sig[1].1 = 1;
        }
        sig
    }

    fn term(&mut self, sig: &[(Name, usize)], vars: &[&str], depth: usize, allow_var: bool) -> Term {
        let leaf = depth <= 1 || self.rng.gen_bool(0.3);
        if allow_var && !vars.is_empty() && (leaf || self.rng.gen_bool(0.25)) {
            return Term::var(vars.choose(&mut self.rng).expect("non-empty"));
        }
        let pool: Vec<&(Name, usize)> = sig.iter().filter(|(_, a)| !leaf || *a == 0).collect();
        let pool = if pool.is_empty() { sig.iter().collect() } else { pool };
        let (f, a) = (*pool.choose(&mut self.rng).expect("non-empty")).clone();
        let args = (0..a)
            .map(|_| self.term(sig, vars, depth.saturating_sub(1), true))
            .collect();
        Term::App(f, args)
    }

    /// The next system; gives up on a draw after a bounded number of tries
    /// and draws a new signature.
    pub fn next_system(&mut self) -> Trs {
        loop {
            let sig = self.signature();
            let n_rules = self.rng.gen_range(1..=self.spec.max_rules);
            let vars = ["x", "y"];
            let mut rules = Vec::new();
            for i in 0..n_rules * 8 {
                if rules.len() == n_rules {
                    break;
                }
                let lhs = self.term(&sig, &vars, self.spec.max_depth, false);
                let rhs = self.term(&sig, &vars, self.spec.max_depth, false);
                if lhs.var_set() != rhs.var_set() || lhs == rhs {
                    continue;
                }
                let key = variant_key(&[&lhs, &rhs]);
                if rules.iter().any(|r: &Rule| variant_key(&[&r.lhs, &r.rhs]) == key) {
                    continue;
                }
                rules.push(Rule::new(format!("r{}", i + 1), lhs, rhs));
            }
            if rules.is_empty() {
                continue;
            }
            let mut s = Signature::new();
            for (f, a) in &sig {
                s.declare(f, *a).expect("distinct names");
            }
            let vars = vars.iter().map(|v| Name::from(*v)).collect();
            if let Ok(trs) = Trs::new(s, vars, rules) {
                return trs;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_loads() {
        let c = corpus();
        assert!(c.len() >= 20);
        assert!(system("lemma").is_some());
        assert!(machine("tiny").is_some());
    }

    #[test]
    fn generator_is_seeded_and_variable_preserving() {
        let a: Vec<String> = {
            let mut g = RandomSystems::new(7, RandomSpec::default());
            (0..20).map(|_| crate::render::render_trs(&g.next_system())).collect()
        };
        let mut g = RandomSystems::new(7, RandomSpec::default());
        for text in &a {
            let trs = g.next_system();
            assert_eq!(&crate::render::render_trs(&trs), text);
            assert!(trs.len() <= 4 && trs.signature().len() <= 5);
            assert!(trs
                .rules()
                .iter()
                .all(|r| r.lhs.var_set() == r.rhs.var_set() && !r.rhs.is_var()));
        }
    }
}
