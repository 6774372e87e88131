//! Arithmetic on `ℕ ∪ {ℵ₀}`, the solvability conditions C1–C6 of a frame,
//! and the search for finite and extended solutions.
//!
//! Under a choice, for every realized 1-type, of whether its class has exactly
//! one element or more than `Z`, all six conditions become linear. Each choice
//! gives an integer program that is decided by branch-and-bound over an exact
//! LP relaxation inside a box large enough to contain a solution whenever one
//! exists. Extended solutions additionally fix a set `S` of variables to `ℵ₀`
//! and reduce every constraint under `ℵ₀` semantics.

pub mod lp;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::frames::{coefficients, Coefficients, Frame};
use crate::types::TypeSpace;
use lp::{branch_and_bound, IlpOutcome, Rel, Row};

/// A natural number or `ℵ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtNat {
    Fin(u128),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);

    pub fn is_inf(self) -> bool {
        self == ExtNat::Inf
    }

    pub fn finite(self) -> Option<u128> {
        match self {
            ExtNat::Fin(n) => Some(n),
            ExtNat::Inf => None,
        }
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> ExtNat {
        ExtNat::Fin(n as u128)
    }
}

pub fn ext_add(a: ExtNat, b: ExtNat) -> ExtNat {
    match (a, b) {
        (ExtNat::Fin(x), ExtNat::Fin(y)) => ExtNat::Fin(x.checked_add(y).expect("ExtNat overflow")),
        _ => ExtNat::Inf,
    }
}

/// `0 · ℵ₀ = 0`.
pub fn ext_mul(a: ExtNat, b: ExtNat) -> ExtNat {
    match (a, b) {
        (ExtNat::Fin(0), _) | (_, ExtNat::Fin(0)) => ExtNat::ZERO,
        (ExtNat::Fin(x), ExtNat::Fin(y)) => ExtNat::Fin(x.checked_mul(y).expect("ExtNat overflow")),
        _ => ExtNat::Inf,
    }
}

pub fn ext_cmp(a: ExtNat, b: ExtNat) -> Ordering {
    a.cmp(&b)
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: ExtNat) -> ExtNat {
        ext_add(self, rhs)
    }
}

impl Mul for ExtNat {
    type Output = ExtNat;
    fn mul(self, rhs: ExtNat) -> ExtNat {
        ext_mul(self, rhs)
    }
}

impl std::iter::Sum for ExtNat {
    fn sum<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(ExtNat::ZERO, ext_add)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtNat {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<ExtNat, Self::Err> {
        if s == "inf" {
            Ok(ExtNat::Inf)
        } else {
            s.parse().map(ExtNat::Fin)
        }
    }
}

/// Render a solution vector as `(5, inf, 1)`.
pub fn format_solution(w: &[ExtNat]) -> String {
    let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error("solution has {got} entries but the frame has {want} star-types")]
    DimensionMismatch { want: usize, got: usize },
    #[error("solution entry {0} is zero")]
    ZeroEntry(usize),
}

/// `u_i`, `v_j` and `x_{i'i}`, indexed like [`Coefficients::types`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedQuantities {
    pub u: Vec<ExtNat>,
    pub v: Vec<(u64, ExtNat)>,
    /// `x[i'][i] = Σ_k o_{i'k} p_{ik} w_k`.
    pub x: Vec<Vec<ExtNat>>,
}

impl DerivedQuantities {
    pub fn v(&self, j: u64) -> ExtNat {
        self.v.iter().find(|(i, _)| *i == j).map_or(ExtNat::ZERO, |(_, x)| *x)
    }
}

fn weighted<T: Copy + Into<u64>>(row: &[T], w: &[ExtNat]) -> ExtNat {
    row.iter().zip(w).map(|(&c, &wk)| ExtNat::from(c.into()) * wk).sum()
}

pub fn derived_quantities(coef: &Coefficients, space: &TypeSpace, w: &[ExtNat]) -> DerivedQuantities {
    let u: Vec<ExtNat> = coef.o.iter().map(|row| weighted(row, w)).collect();
    let mut js: BTreeSet<u64> = coef.invertible.clone();
    js.extend(coef.invertible.iter().map(|&j| space.inverse_index(j)));
    let v = js.into_iter().map(|j| (j, (0..coef.n).map(|k| ExtNat::from(coef.q(j, k)) * w[k]).sum())).collect();
    let l = coef.types.len();
    let x = (0..l)
        .map(|i2| {
            (0..l)
                .map(|i| (0..coef.n).map(|k| ExtNat::from((coef.o[i2][k] * coef.p[i][k]) as u64) * w[k]).sum())
                .collect()
        })
        .collect();
    DerivedQuantities { u, v, x }
}

/// Conditions C1–C6 evaluated literally under `ℵ₀` arithmetic.
pub fn check_solution(f: &Frame, space: &TypeSpace, z: u64, w: &[ExtNat]) -> Result<bool, CountingError> {
    if w.len() != f.dim() {
        return Err(CountingError::DimensionMismatch { want: f.dim(), got: w.len() });
    }
    if let Some(k) = w.iter().position(|&x| x == ExtNat::ZERO) {
        return Err(CountingError::ZeroEntry(k));
    }
    let coef = coefficients(f, space);
    let d = derived_quantities(&coef, space, w);
    let one = ExtNat::Fin(1);
    let zz = ExtNat::from(z);
    let l = coef.types.len();
    // C1
    for &j in &coef.invertible {
        if d.v(j) != d.v(space.inverse_index(j)) {
            return Ok(false);
        }
    }
    for i in 0..l {
        let ui = d.u[i];
        // C2, C3
        if (0..coef.n).any(|k| ExtNat::from(coef.s[i][k]) > ui) || (ui > one && ui <= zz) {
            return Ok(false);
        }
        for i2 in 0..l {
            let in_i = f.in_i(coef.types[i], coef.types[i2]);
            // C5
            if !in_i && d.u[i] > one && d.u[i2] > one {
                return Ok(false);
            }
            if ui > one {
                continue;
            }
            for k in (0..coef.n).filter(|&k| coef.o[i][k] == 1) {
                let r = ExtNat::from(coef.r[i2][k]);
                // The lone element of U_i is not its own receiver.
                let x = match (i == i2, d.x[i2][i]) {
                    (true, ExtNat::Fin(x)) => ExtNat::Fin(x - coef.p[i][k] as u128),
                    (_, x) => x,
                };
                // C4, C6
                if r > x || (!in_i && r < x) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// One side of a linear constraint: `constant + Σ coef · x_k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Side {
    pub constant: u64,
    pub terms: Vec<(usize, u64)>,
}

impl Side {
    pub fn constant(c: u64) -> Side {
        Side { constant: c, terms: Vec::new() }
    }

    pub fn terms(terms: Vec<(usize, u64)>) -> Side {
        Side { constant: 0, terms: terms.into_iter().filter(|&(_, c)| c > 0).collect() }
    }

    fn eval(&self, x: &[ExtNat]) -> ExtNat {
        ExtNat::from(self.constant) + self.terms.iter().map(|&(k, c)| ExtNat::from(c) * x[k]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub lhs: Side,
    pub cmp: Cmp,
    pub rhs: Side,
}

impl Constraint {
    pub fn le(lhs: Side, rhs: Side) -> Constraint {
        Constraint { lhs, cmp: Cmp::Le, rhs }
    }

    pub fn eq(lhs: Side, rhs: Side) -> Constraint {
        Constraint { lhs, cmp: Cmp::Eq, rhs }
    }

    pub fn holds(&self, x: &[ExtNat]) -> bool {
        let (a, b) = (self.lhs.eval(x), self.rhs.eval(x));
        match self.cmp {
            Cmp::Le => a <= b,
            Cmp::Eq => a == b,
        }
    }
}

/// Constraints with natural coefficients over variables `0..nvars`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    pub nvars: usize,
    pub constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn holds(&self, x: &[ExtNat]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    fn rows(&self) -> Vec<Row> {
        self.constraints
            .iter()
            .map(|c| {
                let mut coef = vec![BigInt::zero(); self.nvars];
                for &(k, a) in &c.lhs.terms {
                    coef[k] += a;
                }
                for &(k, b) in &c.rhs.terms {
                    coef[k] -= b;
                }
                Row {
                    coef: coef.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect(),
                    rel: if c.cmp == Cmp::Le { Rel::Le } else { Rel::Eq },
                    rhs: BigInt::from(c.rhs.constant) - BigInt::from(c.lhs.constant),
                }
            })
            .collect()
    }

    /// Under `x_k = ℵ₀` for `k ∈ inf`: `None` if some constraint is false,
    /// otherwise the finite constraints left over (others are true).
    pub fn reduce(&self, inf: &BTreeSet<usize>) -> Option<LinearSystem> {
        let infinite = |s: &Side| s.terms.iter().any(|(k, _)| inf.contains(k));
        let mut out = LinearSystem { nvars: self.nvars, constraints: Vec::new() };
        for c in &self.constraints {
            match (infinite(&c.lhs), infinite(&c.rhs), c.cmp) {
                (false, false, _) => out.constraints.push(c.clone()),
                (true, true, _) | (false, true, Cmp::Le) => {}
                _ => return None,
            }
        }
        Some(out)
    }
}

/// A box bound `n (m a)^{2m+1}` containing some solution of every feasible
/// system with `m` constraints, `n` variables and coefficients at most `a`.
pub fn papadimitriou_bound(sys: &LinearSystem) -> BigUint {
    let rows = sys.rows();
    let m = rows.len().max(1) as u32;
    let mut a = BigUint::one();
    for r in &rows {
        for (_, c) in &r.coef {
            a = a.max(c.magnitude().clone());
        }
        a = a.max(r.rhs.magnitude().clone());
    }
    BigUint::from(sys.nvars.max(1)) * (BigUint::from(m) * a).pow(2 * m + 1)
}

/// Node and time limits shared by one search.
#[derive(Debug, Clone)]
pub struct SolveBudget {
    pub nodes: u64,
    pub deadline: Option<Instant>,
}

impl SolveBudget {
    pub fn nodes(nodes: u64) -> SolveBudget {
        SolveBudget { nodes, deadline: None }
    }

    fn expired(&self) -> bool {
        self.nodes == 0 || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Feasibility over naturals with every variable in `lower_k ..= bound`.
pub fn ilp_feasible(sys: &LinearSystem, lower: &[u64], bound: &BigUint, budget: &mut SolveBudget) -> IlpOutcome {
    for c in &sys.constraints {
        if c.lhs.terms.is_empty() && c.rhs.terms.is_empty() && !c.holds(&[]) {
            return IlpOutcome::Infeasible;
        }
    }
    let lower: Vec<BigInt> = lower.iter().map(|&l| BigInt::from(l)).collect();
    branch_and_bound(sys.nvars, &sys.rows(), &lower, &BigInt::from(bound.clone()), &mut budget.nodes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution(Vec<ExtNat>),
    Infeasible,
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    One,
    Many,
}

/// The frame's conditions as linear systems, one per category assignment.
struct Linearised<'a> {
    frame: &'a Frame,
    coef: Coefficients,
    z: u64,
    /// Star-type indices per relevant 1-type.
    classes: Vec<Vec<usize>>,
    /// C1 as equalities.
    c1: Vec<Constraint>,
}

impl<'a> Linearised<'a> {
    fn new(frame: &'a Frame, space: &TypeSpace, z: u64) -> Option<Linearised<'a>> {
        let coef = coefficients(frame, space);
        let classes: Vec<Vec<usize>> =
            coef.o.iter().map(|row| (0..coef.n).filter(|&k| row[k] == 1).collect()).collect();
        // Messages to an unrealized 1-type violate C2 outright.
        if (0..classes.len()).any(|i| classes[i].is_empty() && coef.s[i].iter().any(|&s| s > 0)) {
            return None;
        }
        let mut c1 = Vec::new();
        for &j in &coef.invertible {
            let j2 = space.inverse_index(j);
            if j2 < j && coef.invertible.contains(&j2) {
                continue;
            }
            let side = |j: u64| Side::terms((0..coef.n).map(|k| (k, coef.q(j, k))).collect());
            c1.push(Constraint::eq(side(j), side(j2)));
        }
        Some(Linearised { frame, coef, z, classes, c1 })
    }

    fn realized(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&i| !self.classes[i].is_empty()).collect()
    }

    fn in_i(&self, i: usize, i2: usize) -> bool {
        self.frame.in_i(self.coef.types[i], self.coef.types[i2])
    }

    /// Category assignments over realized types, pruned by C2 and C5.
    fn assignments(&self) -> Vec<Vec<Option<Category>>> {
        let realized = self.realized();
        let mut out = Vec::new();
        let mut cur = vec![None; self.classes.len()];
        self.assign(&realized, 0, &mut cur, &mut out);
        out
    }

    fn assign(
        &self,
        realized: &[usize],
        pos: usize,
        cur: &mut Vec<Option<Category>>,
        out: &mut Vec<Vec<Option<Category>>>,
    ) {
        let Some(&i) = realized.get(pos) else {
            out.push(cur.clone());
            return;
        };
        for cat in [Category::One, Category::Many] {
            let ok = match cat {
                Category::One => {
                    self.classes[i].len() == 1 && self.coef.s[i].iter().all(|&s| s <= 1)
                }
                Category::Many => {
                    self.in_i(i, i)
                        && realized[..pos].iter().all(|&i2| cur[i2] != Some(Category::Many) || self.in_i(i, i2))
                }
            };
            if ok {
                cur[i] = Some(cat);
                self.assign(realized, pos + 1, cur, out);
            }
        }
        cur[i] = None;
    }

    fn system(&self, cats: &[Option<Category>]) -> LinearSystem {
        let n = self.coef.n;
        let l = self.classes.len();
        let mut cs = self.c1.clone();
        let u = |i: usize| Side::terms(self.classes[i].iter().map(|&k| (k, 1)).collect());
        for (i, cat) in cats.iter().enumerate().take(l) {
            match cat {
                None => {}
                Some(Category::Many) => {
                    cs.push(Constraint::le(Side::constant(self.z + 1), u(i)));
                    for k in 0..n {
                        if self.coef.s[i][k] > 1 {
                            cs.push(Constraint::le(Side::constant(self.coef.s[i][k]), u(i)));
                        }
                    }
                }
                Some(Category::One) => {
                    let k = self.classes[i][0];
                    cs.push(Constraint::eq(u(i), Side::constant(1)));
                    for i2 in 0..l {
                        let r = self.coef.r[i2][k];
                        let x = Side::terms(
                            (0..n)
                                .filter(|&k2| i2 != i || k2 != k)
                                .map(|k2| (k2, (self.coef.o[i2][k2] * self.coef.p[i][k2]) as u64))
                                .collect(),
                        );
                        if r > 0 {
                            cs.push(Constraint::le(Side::constant(r), x.clone()));
                        }
                        if !self.in_i(i, i2) && !x.terms.is_empty() {
                            cs.push(Constraint::le(x, Side::constant(r)));
                        }
                    }
                }
            }
        }
        LinearSystem { nvars: n, constraints: cs }
    }
}

/// A finite solution with every entry at least 1.
pub fn solve_finite(f: &Frame, space: &TypeSpace, z: u64, budget: &mut SolveBudget) -> SolveOutcome {
    solve(f, space, z, false, budget)
}

/// An extended solution; finite ones are preferred (smallest `S` first).
pub fn solve_extended(f: &Frame, space: &TypeSpace, z: u64, budget: &mut SolveBudget) -> SolveOutcome {
    solve(f, space, z, true, budget)
}

fn solve(f: &Frame, space: &TypeSpace, z: u64, extended: bool, budget: &mut SolveBudget) -> SolveOutcome {
    let Some(lin) = Linearised::new(f, space, z) else {
        return SolveOutcome::Infeasible;
    };
    let n = f.dim();
    let systems: Vec<(Vec<Option<Category>>, LinearSystem)> =
        lin.assignments().into_iter().map(|c| { let s = lin.system(&c); (c, s) }).collect();
    let max_inf = if extended { n } else { 0 };
    let mut exhausted = false;
    for size in 0..=max_inf {
        for inf in subsets(n, size) {
            for (cats, sys) in &systems {
                // A singleton class cannot hold ℵ₀ elements.
                if inf.iter().any(|&k| (0..lin.classes.len()).any(|i| cats[i] == Some(Category::One) && lin.classes[i].contains(&k))) {
                    continue;
                }
                if budget.expired() {
                    return SolveOutcome::Exhausted;
                }
                let Some(reduced) = sys.reduce(&inf) else { continue };
                let (finite_sys, back) = restrict_to_finite(&reduced, &inf);
                let bound = papadimitriou_bound(&finite_sys);
                let lower = vec![1; finite_sys.nvars];
                match ilp_feasible(&finite_sys, &lower, &bound, budget) {
                    IlpOutcome::Feasible(x) => {
                        let mut w = vec![ExtNat::Inf; n];
                        for (pos, &k) in back.iter().enumerate() {
                            match x[pos].to_u128() {
                                Some(v) => w[k] = ExtNat::Fin(v),
                                None => return SolveOutcome::Exhausted,
                            }
                        }
                        assert!(
                            check_solution(f, space, z, &w).expect("well-formed"),
                            "linearisation produced a vector failing C1-C6"
                        );
                        return SolveOutcome::Solution(w);
                    }
                    IlpOutcome::Infeasible => {}
                    IlpOutcome::BudgetExhausted => exhausted = true,
                }
            }
        }
    }
    if exhausted {
        SolveOutcome::Exhausted
    } else {
        SolveOutcome::Infeasible
    }
}

/// Renumber the variables outside `inf`; also returns the original index of
/// each new variable.
fn restrict_to_finite(sys: &LinearSystem, inf: &BTreeSet<usize>) -> (LinearSystem, Vec<usize>) {
    let back: Vec<usize> = (0..sys.nvars).filter(|k| !inf.contains(k)).collect();
    let mut fwd = vec![usize::MAX; sys.nvars];
    for (pos, &k) in back.iter().enumerate() {
        fwd[k] = pos;
    }
    let map = |s: &Side| Side { constant: s.constant, terms: s.terms.iter().map(|&(k, c)| (fwd[k], c)).collect() };
    let constraints =
        sys.constraints.iter().map(|c| Constraint { lhs: map(&c.lhs), cmp: c.cmp, rhs: map(&c.rhs) }).collect();
    (LinearSystem { nvars: back.len(), constraints }, back)
}

/// All `size`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, size: usize) -> Vec<BTreeSet<usize>> {
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if left == 0 {
            out.push(cur.iter().copied().collect());
            return;
        }
        for k in start..n {
            cur.push(k);
            go(k + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out);
    out
}

/// Solve a bare linear system over `ℕ ∪ {ℵ₀}` with every variable at least
/// `lower`, trying finite assignments first.
pub fn solve_system_extended(sys: &LinearSystem, lower: u64, budget: &mut SolveBudget) -> SolveOutcome {
    let mut exhausted = false;
    for size in 0..=sys.nvars {
        for inf in subsets(sys.nvars, size) {
            let Some(reduced) = sys.reduce(&inf) else { continue };
            let (finite_sys, back) = restrict_to_finite(&reduced, &inf);
            let bound = papadimitriou_bound(&finite_sys);
            match ilp_feasible(&finite_sys, &vec![lower; finite_sys.nvars], &bound, budget) {
                IlpOutcome::Feasible(x) => {
                    let mut w = vec![ExtNat::Inf; sys.nvars];
                    for (pos, &k) in back.iter().enumerate() {
                        w[k] = ExtNat::Fin(x[pos].to_u128().expect("solution within u128"));
                    }
                    debug_assert!(sys.holds(&w));
                    return SolveOutcome::Solution(w);
                }
                IlpOutcome::Infeasible => {}
                IlpOutcome::BudgetExhausted => exhausted = true,
            }
        }
    }
    if exhausted {
        SolveOutcome::Exhausted
    } else {
        SolveOutcome::Infeasible
    }
}
