use lmtk_core::closure::{fc_candidates, fc_iterate};
use lmtk_core::corpus::corpus;
use lmtk_core::overlap::critical_pairs;
use lmtk_core::{match_term, Position, Rule, Term, Trs};

// One rewrite step with `rule` at `p`, computed by matching.
fn step_with(rule: &Rule, t: &Term, p: &Position) -> Option<Term> {
    let redex = t.get(p)?;
    let sigma = match_term(&rule.lhs, redex)?;
    t.replace_at(p, sigma.apply(&rule.rhs)).ok()
}

fn rule<'a>(trs: &'a Trs, label: &str) -> &'a Rule {
    trs.rule(label).unwrap_or_else(|| panic!("unknown rule {label}"))
}

#[test]
fn critical_pairs_are_two_steps_from_their_peak() {
    let mut total = 0;
    for (name, trs) in corpus() {
        for cp in critical_pairs(&trs) {
            total += 1;
            let left = step_with(rule(&trs, &cp.inner), &cp.peak, &cp.position);
            assert_eq!(left.as_ref(), Some(&cp.left), "{name}: {cp}");
            let right = step_with(rule(&trs, &cp.outer), &cp.peak, &Position::root());
            assert_eq!(right.as_ref(), Some(&cp.right), "{name}: {cp}");
            let outer = rule(&trs, &cp.outer);
            assert_eq!(cp.mgu.apply(&outer.lhs), cp.peak, "{name}: {cp}");
        }
    }
    assert!(total > 0);
}

#[test]
fn composed_rules_are_derivable_in_two_steps() {
    let mut total = 0;
    for (name, trs) in corpus() {
        for cand in fc_candidates(trs.rules(), trs.rules()) {
            total += 1;
            let first = rule(&trs, &cand.first);
            let second = rule(&trs, &cand.second);
            let mid = step_with(first, &cand.rule.lhs, &Position::root())
                .unwrap_or_else(|| panic!("{name}: [{}] does not apply to {}", cand.first, cand.rule.lhs));
            let end = step_with(second, &mid, &cand.position);
            assert_eq!(end.as_ref(), Some(&cand.rule.rhs), "{name}: {cand}");
        }
    }
    assert!(total > 0);
}

#[test]
fn forward_closure_generations_only_grow() {
    for (name, trs) in corpus() {
        let mut previous: Vec<Rule> = trs.rules().to_vec();
        for k in 1..=4 {
            let fc = fc_iterate(&trs, k);
            assert!(fc.closure.len() >= previous.len(), "{name} at {k}");
            assert_eq!(&fc.closure[..previous.len()], &previous[..], "{name} at {k}");
            previous = fc.closure;
        }
    }
}

#[test]
fn closure_rules_are_sound_rewrite_sequences() {
    // every closure rule lhs rewrites to its rhs in the original system
    for (name, trs) in corpus() {
        let fc = fc_iterate(&trs, 3);
        for r in &fc.closure {
            let a = trs.normal_form(&r.lhs, 10_000).unwrap();
            let b = trs.normal_form(&r.rhs, 10_000).unwrap();
            if name != "diverging" {
                assert_eq!(a, b, "{name}: {r}");
            }
        }
    }
}
