//! Reduction of an arbitrary sentence to the shape
//! `∀x α ∧ ∀x∀y(β ∨ x=y) ∧ ⋀_h ∀x ∃=C_h y (f_h(x,y) ∧ x≠y)`.
//!
//! Quantified subformulas are replaced bottom-up by fresh unary atoms. Each
//! atom `q` stands for `D_c(x) = ∃≥c y (χ(x,y) ∧ x≠y)` with `χ` equality-free,
//! and is axiomatised only in the direction its occurrences need:
//! `q → D_c` through a fresh counting predicate with subscript `c`, and
//! `D_c → q` either by a plain clause (`c = 1`) or through a fresh counting
//! predicate with subscript `c - 1`. Every model of the result restricts to a
//! model of the input, and every model of the input with more than `C`
//! elements expands to one of the result.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::syntax::{signature_of, Formula, QuantKind, Signature, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub alpha: Formula,
    pub beta: Formula,
    pub counting_conjuncts: Vec<(String, BigUint)>,
    pub sigma: Signature,
}

impl NormalForm {
    pub fn m(&self) -> usize {
        self.counting_conjuncts.len()
    }

    pub fn counting_names(&self) -> Vec<String> {
        self.counting_conjuncts.iter().map(|(f, _)| f.clone()).collect()
    }
}

/// `C = max_h C_h`, or 0 without counting conjuncts.
pub fn max_count(nf: &NormalForm) -> BigUint {
    nf.counting_conjuncts.iter().map(|(_, c)| c.clone()).max().unwrap_or_default()
}

/// The normal form as a single sentence.
pub fn denormalize(nf: &NormalForm) -> Formula {
    let (x, y) = (Var::X, Var::Y);
    let mut parts = vec![
        Formula::forall(x, nf.alpha.clone()),
        Formula::forall(x, Formula::forall(y, Formula::or(nf.beta.clone(), Formula::Eq(x, y)))),
    ];
    for (f, c) in &nf.counting_conjuncts {
        parts.push(Formula::forall(x, counting_conjunct(f, c.clone())));
    }
    Formula::conj(parts)
}

fn counting_conjunct(f: &str, c: BigUint) -> Formula {
    Formula::Quant {
        kind: QuantKind::Exactly,
        count: Some(c),
        var: Var::Y,
        body: Box::new(Formula::and(
            Formula::binary(f, Var::X, Var::Y),
            Formula::not(Formula::Eq(Var::X, Var::Y)),
        )),
    }
}

/// Equisatisfiable normal form over domains larger than its `C`.
pub fn scottify(phi: &Formula) -> NormalForm {
    let input_sig = signature_of(phi).expect("sentence with consistent arities");
    let mut s = Scottifier::new(&input_sig);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut counting: Vec<(String, BigUint)> = Vec::new();
    for conjunct in conjuncts(phi) {
        if let Some((f, c)) = as_counting_conjunct(conjunct) {
            if !counting.iter().any(|(g, _)| *g == f) {
                counting.push((f, c));
                continue;
            }
        }
        match conjunct {
            Formula::Quant { kind: QuantKind::Forall, var, body, .. } => {
                let body = canonical(*var, body);
                match &body {
                    Formula::Quant { kind: QuantKind::Forall, var: inner, body: inner_body, .. }
                        if *inner == Var::Y =>
                    {
                        let psi = s.abstract_formula(inner_body);
                        alpha.push(diagonal(&psi));
                        beta.push(off_diagonal(&psi));
                    }
                    _ => alpha.push(s.abstract_formula(&body)),
                }
            }
            other => alpha.push(s.abstract_formula(other)),
        }
    }
    let (extra_beta, extra_counting) = s.axioms(&alpha);
    beta.extend(extra_beta);
    counting.extend(extra_counting);
    let mut sigma = input_sig;
    sigma.unary.extend(s.unary_names());
    sigma.binary.extend(counting.iter().map(|(f, _)| f.clone()).filter(|f| f.starts_with(&s.prefix)));
    debug_assert!(alpha.iter().all(|f| !f.free_vars().contains(&Var::Y)));
    NormalForm {
        alpha: fold(&Formula::conj(alpha.iter().map(|f| fold(f, Eqs::Keep))), Eqs::Keep),
        beta: fold(&Formula::conj(beta.iter().map(|f| fold(f, Eqs::Keep))), Eqs::Keep),
        counting_conjuncts: counting,
        sigma,
    }
}

fn conjuncts(phi: &Formula) -> Vec<&Formula> {
    match phi {
        Formula::And(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        other => vec![other],
    }
}

/// Rename so that the quantifier binding `var` binds `x`.
fn canonical(var: Var, body: &Formula) -> Formula {
    if var == Var::X {
        body.clone()
    } else {
        body.swap_vars()
    }
}

/// Recognise `∀x ∃=C y (f(x,y) ∧ x≠y)` (either variable naming, either
/// conjunct order) with `C ≥ 1`.
fn as_counting_conjunct(phi: &Formula) -> Option<(String, BigUint)> {
    let Formula::Quant { kind: QuantKind::Forall, var, body, .. } = phi else {
        return None;
    };
    let body = canonical(*var, body);
    let Formula::Quant { kind: QuantKind::Exactly, count: Some(c), var: Var::Y, body } = body else {
        return None;
    };
    if c.is_zero() {
        return None;
    }
    let Formula::And(a, b) = *body else {
        return None;
    };
    let neq = |f: &Formula| {
        matches!(f, Formula::Not(e) if matches!(**e, Formula::Eq(Var::X, Var::Y) | Formula::Eq(Var::Y, Var::X)))
    };
    let atom = |f: &Formula| match f {
        Formula::Binary(name, Var::X, Var::Y) => Some(name.clone()),
        _ => None,
    };
    match (atom(&a), atom(&b)) {
        (Some(f), _) if neq(&b) => Some((f, c)),
        (_, Some(f)) if neq(&a) => Some((f, c)),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Eqs {
    Keep,
    /// `x` and `y` denote the same element.
    Diagonal,
    /// `x` and `y` denote distinct elements.
    OffDiagonal,
}

fn diagonal(psi: &Formula) -> Formula {
    fold(&psi.substitute_qf(Var::Y, Var::X), Eqs::Diagonal)
}

fn off_diagonal(psi: &Formula) -> Formula {
    fold(psi, Eqs::OffDiagonal)
}

/// Constant folding of a quantifier-free formula, resolving equalities per `eqs`.
fn fold(phi: &Formula, eqs: Eqs) -> Formula {
    use Formula as F;
    match phi {
        F::Eq(a, b) => match eqs {
            _ if a == b => F::True,
            Eqs::Keep => phi.clone(),
            Eqs::Diagonal => F::True,
            Eqs::OffDiagonal => F::False,
        },
        F::Not(a) => match fold(a, eqs) {
            F::True => F::False,
            F::False => F::True,
            F::Not(inner) => *inner,
            other => F::not(other),
        },
        F::And(a, b) => match (fold(a, eqs), fold(b, eqs)) {
            (F::False, _) | (_, F::False) => F::False,
            (F::True, g) | (g, F::True) => g,
            (f, g) => F::and(f, g),
        },
        F::Or(a, b) => match (fold(a, eqs), fold(b, eqs)) {
            (F::True, _) | (_, F::True) => F::True,
            (F::False, g) | (g, F::False) => g,
            (f, g) => F::or(f, g),
        },
        F::Implies(a, b) => fold(&F::or(F::not((**a).clone()), (**b).clone()), eqs),
        F::Iff(a, b) => match (fold(a, eqs), fold(b, eqs)) {
            (F::True, g) | (g, F::True) => g,
            (F::False, g) | (g, F::False) => fold(&F::not(g), eqs),
            (f, g) => F::iff(f, g),
        },
        F::Quant { .. } => panic!("fold expects a quantifier-free formula"),
        atom => atom.clone(),
    }
}

/// One abstracted `D_c(x) = ∃≥c y (χ ∧ x≠y)`.
struct Definition {
    name: String,
    c: BigUint,
    chi: Formula,
}

struct Scottifier {
    prefix: String,
    defs: Vec<Definition>,
    index: HashMap<(BigUint, Formula), usize>,
}

impl Scottifier {
    fn new(sig: &Signature) -> Scottifier {
        let mut prefix = "_".to_string();
        while sig.unary.iter().chain(&sig.binary).any(|n| n.starts_with(&prefix)) {
            prefix.push('_');
        }
        Scottifier { prefix, defs: Vec::new(), index: HashMap::new() }
    }

    fn unary_names(&self) -> Vec<String> {
        self.defs.iter().map(|d| d.name.clone()).collect()
    }

    /// Quantifier-free formula (possibly with equality) equivalent to `phi`
    /// once every fresh atom is read as its definition.
    fn abstract_formula(&mut self, phi: &Formula) -> Formula {
        use Formula as F;
        match phi {
            F::Not(a) => F::not(self.abstract_formula(a)),
            F::And(a, b) => F::and(self.abstract_formula(a), self.abstract_formula(b)),
            F::Or(a, b) => F::or(self.abstract_formula(a), self.abstract_formula(b)),
            F::Implies(a, b) => F::implies(self.abstract_formula(a), self.abstract_formula(b)),
            F::Iff(a, b) => F::iff(self.abstract_formula(a), self.abstract_formula(b)),
            F::Quant { kind, count, var, body } => {
                // Make the bound variable `y`, so the result is a formula in `x`.
                let body = canonical(var.other(), body);
                let psi = self.abstract_formula(&body);
                let out = self.count(*kind, count.as_ref(), &psi);
                // Closed subformulas stay in the vacuous `x`.
                if *var == Var::X && !phi.free_vars().is_empty() {
                    out.swap_vars()
                } else {
                    out
                }
            }
            atom => atom.clone(),
        }
    }

    /// The quantifier `kind` applied to `psi(x,y)` binding `y`.
    fn count(&mut self, kind: QuantKind, c: Option<&BigUint>, psi: &Formula) -> Formula {
        use Formula as F;
        let one = BigUint::one();
        let f = match kind {
            QuantKind::Forall => F::not(self.at_least(&one, &F::not(psi.clone()))),
            QuantKind::Exists => self.at_least(&one, psi),
            QuantKind::AtLeast => self.at_least(c.unwrap(), psi),
            QuantKind::AtMost => F::not(self.at_least(&(c.unwrap() + 1u32), psi)),
            QuantKind::Exactly => {
                let c = c.unwrap();
                F::and(self.at_least(c, psi), F::not(self.at_least(&(c + 1u32), psi)))
            }
        };
        fold(&f, Eqs::Keep)
    }

    /// `∃≥c y psi  ⇔  (psi(x,x) ∧ D_{c-1}) ∨ D_c`.
    fn at_least(&mut self, c: &BigUint, psi: &Formula) -> Formula {
        if c.is_zero() {
            return Formula::True;
        }
        let chi = off_diagonal(psi);
        let lower = self.d(&(c - 1u32), &chi);
        let upper = self.d(c, &chi);
        Formula::or(Formula::and(diagonal(psi), lower), upper)
    }

    fn d(&mut self, c: &BigUint, chi: &Formula) -> Formula {
        if c.is_zero() {
            return Formula::True;
        }
        if *chi == Formula::False {
            return Formula::False;
        }
        let key = (c.clone(), chi.clone());
        let i = match self.index.get(&key) {
            Some(&i) => i,
            None => {
                let i = self.defs.len();
                let name = format!("{}q{i}", self.prefix);
                self.defs.push(Definition { name, c: c.clone(), chi: chi.clone() });
                self.index.insert(key, i);
                i
            }
        };
        Formula::Unary(self.defs[i].name.clone(), Var::X)
    }

    /// Axioms for the fresh atoms occurring in `top`, in the needed directions.
    fn axioms(&self, top: &[Formula]) -> (Vec<Formula>, Vec<(String, BigUint)>) {
        let by_name: BTreeMap<&str, usize> =
            self.defs.iter().enumerate().map(|(i, d)| (d.name.as_str(), i)).collect();
        let mut pol = vec![Polarity::default(); self.defs.len()];
        for f in top {
            collect_polarity(f, true, &by_name, &mut |i, s| pol[i].add(s));
        }
        // Definitions only mention earlier atoms, so one reverse sweep suffices.
        for i in (0..self.defs.len()).rev() {
            let p = pol[i];
            let mut updates = Vec::new();
            collect_polarity(&self.defs[i].chi, true, &by_name, &mut |j, s| {
                if p.pos {
                    updates.push((j, s));
                }
                if p.neg {
                    updates.push((j, !s));
                }
            });
            for (j, s) in updates {
                pol[j].add(s);
            }
        }
        let (x, y) = (Var::X, Var::Y);
        let mut beta = Vec::new();
        let mut counting = Vec::new();
        for (i, d) in self.defs.iter().enumerate() {
            let q = Formula::unary(&d.name, x);
            if pol[i].pos {
                let f = format!("{}f{i}", self.prefix);
                beta.push(Formula::implies(
                    Formula::and(q.clone(), Formula::binary(&f, x, y)),
                    d.chi.clone(),
                ));
                counting.push((f, d.c.clone()));
            }
            if pol[i].neg {
                if d.c.is_one() {
                    beta.push(Formula::implies(Formula::not(q.clone()), Formula::not(d.chi.clone())));
                } else {
                    let g = format!("{}g{i}", self.prefix);
                    beta.push(Formula::implies(
                        Formula::and(Formula::not(q), d.chi.clone()),
                        Formula::binary(&g, x, y),
                    ));
                    counting.push((g, &d.c - 1u32));
                }
            }
        }
        (beta, counting)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Polarity {
    pos: bool,
    neg: bool,
}

impl Polarity {
    fn add(&mut self, positive: bool) {
        if positive {
            self.pos = true;
        } else {
            self.neg = true;
        }
    }
}

fn collect_polarity(
    phi: &Formula,
    positive: bool,
    by_name: &BTreeMap<&str, usize>,
    see: &mut impl FnMut(usize, bool),
) {
    use Formula as F;
    match phi {
        F::Unary(p, _) => {
            if let Some(&i) = by_name.get(p.as_str()) {
                see(i, positive);
            }
        }
        F::Not(a) => collect_polarity(a, !positive, by_name, see),
        F::And(a, b) | F::Or(a, b) => {
            collect_polarity(a, positive, by_name, see);
            collect_polarity(b, positive, by_name, see);
        }
        F::Implies(a, b) => {
            collect_polarity(a, !positive, by_name, see);
            collect_polarity(b, positive, by_name, see);
        }
        F::Iff(a, b) => {
            for side in [a, b] {
                collect_polarity(side, positive, by_name, see);
                collect_polarity(side, !positive, by_name, see);
            }
        }
        _ => {}
    }
}
