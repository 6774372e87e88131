//! Exact two-phase simplex over the rationals and a depth-first
//! branch-and-bound for bounded integer feasibility.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

/// `Σ coef_k · x_k  rel  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coef: Vec<(usize, BigInt)>,
    pub rel: Rel,
    pub rhs: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IlpOutcome {
    Feasible(Vec<BigInt>),
    Infeasible,
    BudgetExhausted,
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

/// Minimise `Σ y` subject to `rows` and `y ≥ 0`; `None` when infeasible.
fn lp_min_sum(n: usize, rows: &[(Vec<BigRational>, Rel, BigRational)]) -> Option<Vec<BigRational>> {
    let m = rows.len();
    let mut rels = Vec::with_capacity(m);
    let mut a: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (coef, rel, rhs) in rows {
        if rhs.is_negative() {
            a.push(coef.iter().map(|c| -c).collect());
            b.push(-rhs);
            rels.push(match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            });
        } else {
            a.push(coef.clone());
            b.push(rhs.clone());
            rels.push(*rel);
        }
    }
    let n_slack = rels.iter().filter(|r| **r != Rel::Eq).count();
    let n_art = rels.iter().filter(|r| **r != Rel::Le).count();
    let cols = n + n_slack + n_art;
    let art_start = n + n_slack;
    let zero = BigRational::zero();
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut si, mut ai) = (n, art_start);
    for r in 0..m {
        let mut row = vec![zero.clone(); cols + 1];
        row[..n].clone_from_slice(&a[r]);
        row[cols] = b[r].clone();
        match rels[r] {
            Rel::Le => {
                row[si] = BigRational::one();
                basis.push(si);
                si += 1;
            }
            Rel::Ge => {
                row[si] = -BigRational::one();
                si += 1;
                row[ai] = BigRational::one();
                basis.push(ai);
                ai += 1;
            }
            Rel::Eq => {
                row[ai] = BigRational::one();
                basis.push(ai);
                ai += 1;
            }
        }
        t.push(row);
    }
    let mut phase1 = vec![zero.clone(); cols];
    for c in phase1.iter_mut().skip(art_start) {
        *c = BigRational::one();
    }
    let mut tab = Tableau { t, basis, cols };
    tab.optimise(&phase1, cols);
    if !tab.objective(&phase1).is_zero() {
        return None;
    }
    // Drive artificials out of the basis, dropping redundant rows.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= art_start {
            match (0..art_start).find(|&c| !tab.t[r][c].is_zero()) {
                Some(c) => tab.pivot(r, c),
                None => {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut phase2 = vec![zero.clone(); cols];
    for c in phase2.iter_mut().take(n) {
        *c = BigRational::one();
    }
    tab.optimise(&phase2, art_start);
    let mut y = vec![zero; n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            y[bv] = tab.t[r][tab.cols].clone();
        }
    }
    Some(y)
}

struct Tableau {
    t: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    fn objective(&self, cost: &[BigRational]) -> BigRational {
        self.basis.iter().enumerate().map(|(r, &bv)| &cost[bv] * &self.t[r][self.cols]).sum()
    }

    /// Bland's rule, entering columns restricted to `0..usable`.
    fn optimise(&mut self, cost: &[BigRational], usable: usize) {
        loop {
            let entering = (0..usable).find(|&c| {
                if self.basis.contains(&c) {
                    return false;
                }
                let reduced: BigRational = cost[c].clone()
                    - self.basis.iter().enumerate().map(|(r, &bv)| &cost[bv] * &self.t[r][c]).sum::<BigRational>();
                reduced.is_negative()
            });
            let Some(c) = entering else { return };
            let mut best: Option<(usize, BigRational)> = None;
            for r in 0..self.t.len() {
                if self.t[r][c].is_positive() {
                    let ratio = &self.t[r][self.cols] / &self.t[r][c];
                    let better = match &best {
                        None => true,
                        Some((br, bratio)) => ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                // Unbounded below cannot happen: the objective is a sum of
                // nonnegative variables.
                None => return,
            }
        }
    }
}

/// Integer feasibility of `rows` with `lower[k] ≤ x_k ≤ upper`.
pub fn branch_and_bound(
    n: usize,
    rows: &[Row],
    lower: &[BigInt],
    upper: &BigInt,
    nodes: &mut u64,
) -> IlpOutcome {
    let mut stack = vec![(lower.to_vec(), vec![upper.clone(); n])];
    let mut exhausted = false;
    while let Some((lo, hi)) = stack.pop() {
        if *nodes == 0 {
            exhausted = true;
            break;
        }
        *nodes -= 1;
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            continue;
        }
        let Some(x) = relax(n, rows, &lo, &hi) else { continue };
        match x.iter().position(|v| !v.is_integer()) {
            None => return IlpOutcome::Feasible(x.iter().map(|v| v.to_integer()).collect()),
            Some(k) => {
                let fl = x[k].floor().to_integer();
                let mut up_lo = lo.clone();
                up_lo[k] = &fl + 1;
                let mut down_hi = hi.clone();
                down_hi[k] = fl;
                stack.push((up_lo, hi));
                stack.push((lo, down_hi));
            }
        }
    }
    if exhausted {
        IlpOutcome::BudgetExhausted
    } else {
        IlpOutcome::Infeasible
    }
}

/// LP relaxation under the box, returned in the original coordinates.
fn relax(n: usize, rows: &[Row], lo: &[BigInt], hi: &[BigInt]) -> Option<Vec<BigRational>> {
    let mut lp = Vec::with_capacity(rows.len() + n);
    for row in rows {
        let mut coef = vec![BigRational::zero(); n];
        let mut rhs = rat(&row.rhs);
        for (k, c) in &row.coef {
            coef[*k] += rat(c);
            rhs -= rat(c) * rat(&lo[*k]);
        }
        lp.push((coef, row.rel, rhs));
    }
    for k in 0..n {
        let mut coef = vec![BigRational::zero(); n];
        coef[k] = BigRational::one();
        lp.push((coef, Rel::Le, rat(&(&hi[k] - &lo[k]))));
    }
    let y = lp_min_sum(n, &lp)?;
    Some(y.into_iter().zip(lo).map(|(v, l)| v + rat(l)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coef: &[(usize, i64)], rel: Rel, rhs: i64) -> Row {
        Row { coef: coef.iter().map(|&(k, c)| (k, BigInt::from(c))).collect(), rel, rhs: rhs.into() }
    }

    fn solve(n: usize, rows: &[Row], lower: i64, upper: i64) -> IlpOutcome {
        let mut nodes = 10_000;
        branch_and_bound(n, rows, &vec![BigInt::from(lower); n], &BigInt::from(upper), &mut nodes)
    }

    #[test]
    fn parity_is_infeasible() {
        assert_eq!(solve(1, &[row(&[(0, 2)], Rel::Eq, 3)], 0, 100), IlpOutcome::Infeasible);
    }

    #[test]
    fn cyclic_strict_inequalities_are_infeasible_quickly() {
        let rows = [row(&[(0, 1), (1, -1)], Rel::Ge, 1), row(&[(1, 1), (0, -1)], Rel::Ge, 1)];
        assert_eq!(solve(2, &rows, 0, 1 << 40), IlpOutcome::Infeasible);
    }

    #[test]
    fn finds_small_solutions() {
        let rows = [row(&[(0, 1), (1, 1)], Rel::Ge, 7), row(&[(0, 3), (1, -2)], Rel::Eq, 1)];
        match solve(2, &rows, 1, 1000) {
            IlpOutcome::Feasible(x) => {
                assert!(&x[0] + &x[1] >= BigInt::from(7));
                assert_eq!(BigInt::from(3) * &x[0] - BigInt::from(2) * &x[1], BigInt::from(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn budget_is_reported() {
        let rows = [row(&[(0, 2), (1, 2)], Rel::Eq, 3)];
        let mut nodes = 0;
        let out = branch_and_bound(2, &rows, &[0.into(), 0.into()], &BigInt::from(10), &mut nodes);
        assert_eq!(out, IlpOutcome::BudgetExhausted);
    }
}
