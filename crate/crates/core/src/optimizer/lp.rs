//! Dense two-phase simplex over exact rationals.
//!
//! Problems here have at most a handful of variables and a few dozen rows,
//! so a full tableau with Bland's rule is plenty and guarantees termination.

use crate::numeric::Rational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = self
            .coeffs
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (a, v)| acc + a * v);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// `minimize objective·x` subject to `constraints` and `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.width]
    }

    fn pivot(&mut self, objective: &mut [Rational], row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        if !objective[col].is_zero() {
            let factor = objective[col].clone();
            for (v, p) in objective.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced-cost row for `costs` given the current basis. The last entry
    /// holds minus the objective value.
    fn reduced_costs(&self, costs: &[Rational]) -> Vec<Rational> {
        let mut z: Vec<Rational> = costs.to_vec();
        z.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let c = &costs[b];
            if c.is_zero() {
                continue;
            }
            for (zv, rv) in z.iter_mut().zip(row) {
                *zv -= c * rv;
            }
        }
        z
    }

    /// Runs simplex iterations; returns false if unbounded.
    fn optimize(&mut self, z: &mut [Rational], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && z[j].is_negative());
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(z, row, col);
        }
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.vars(), "constraint width");
        self.constraints
            .push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.iter().all(|v| !v.is_negative()) && self.constraints.iter().all(|c| c.is_satisfied(x))
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.vars();
        // Normalise to non-negative right-hand sides.
        let rows: Vec<(Vec<Rational>, Relation, Rational)> = self
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), rel, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let width = n + slack_count + art_count;
        let first_art = n + slack_count;

        let mut tableau = Tableau {
            rows: Vec::with_capacity(rows.len()),
            basis: Vec::with_capacity(rows.len()),
            width,
        };
        let (mut slack, mut art) = (n, first_art);
        for (coeffs, rel, rhs) in rows {
            let mut row = vec![Rational::zero(); width + 1];
            for (dst, a) in row.iter_mut().zip(coeffs) {
                *dst = a;
            }
            row[width] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = Rational::one();
                    tableau.basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    tableau.basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    tableau.basis.push(art);
                    art += 1;
                }
            }
            tableau.rows.push(row);
        }

        let mut allowed = vec![true; width];
        if art_count > 0 {
            let costs: Vec<Rational> = (0..width)
                .map(|j| {
                    if j >= first_art {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            let mut z = tableau.reduced_costs(&costs);
            // Phase one is bounded below by zero.
            tableau.optimize(&mut z, &allowed);
            if !z[width].is_zero() {
                return LpOutcome::Infeasible;
            }
            // Drive remaining artificials out of the basis or drop their rows.
            let mut i = 0;
            while i < tableau.rows.len() {
                if tableau.basis[i] >= first_art {
                    let col = (0..first_art).find(|&j| !tableau.rows[i][j].is_zero());
                    match col {
                        Some(j) => {
                            let mut dummy = vec![Rational::zero(); width + 1];
                            tableau.pivot(&mut dummy, i, j);
                        }
                        None => {
                            tableau.rows.remove(i);
                            tableau.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
            for a in allowed.iter_mut().skip(first_art) {
                *a = false;
            }
        }

        let mut costs = self.objective.clone();
        costs.resize(width, Rational::zero());
        let mut z = tableau.reduced_costs(&costs);
        if !tableau.optimize(&mut z, &allowed) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); n];
        for (row, &b) in tableau.rows.iter().zip(&tableau.basis) {
            if b < n {
                x[b] = row[width].clone();
            }
        }
        let value = -z[width].clone();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Vertex-enumeration oracle: every basic solution from `n` tight rows
    /// (including `x_i = 0`), solved by Gaussian elimination.
    fn brute_force(lp: &LinearProgram) -> Option<Rational> {
        let n = lp.vars();
        let mut rows: Vec<(Vec<Rational>, Rational)> = lp
            .constraints
            .iter()
            .map(|c| (c.coeffs.clone(), c.rhs.clone()))
            .collect();
        for i in 0..n {
            let mut e = vec![int(0); n];
            e[i] = int(1);
            rows.push((e, int(0)));
        }
        let mut best: Option<Rational> = None;
        for idx in combinations(rows.len(), n) {
            let mut a: Vec<Vec<Rational>> = idx
                .iter()
                .map(|&i| {
                    let mut r = rows[i].0.clone();
                    r.push(rows[i].1.clone());
                    r
                })
                .collect();
            if let Some(x) = solve_square(&mut a, n) {
                if lp.is_feasible_point(&x) {
                    let v = lp
                        .objective
                        .iter()
                        .zip(&x)
                        .fold(int(0), |acc, (c, v)| acc + c * v);
                    if best.as_ref().is_none_or(|b| v < *b) {
                        best = Some(v);
                    }
                }
            }
        }
        best
    }

    fn combinations(m: usize, n: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for i in start..m {
                cur.push(i);
                go(i + 1, m, n, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, m, n, &mut Vec::new(), &mut out);
        out
    }

    fn solve_square(a: &mut [Vec<Rational>], n: usize) -> Option<Vec<Rational>> {
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            let inv = a[col][col].recip();
            for v in a[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    let src = a[col].clone();
                    for (v, s) in a[r].iter_mut().zip(&src) {
                        *v -= &f * s;
                    }
                }
            }
        }
        Some(a.iter().map(|r| r[n].clone()).collect())
    }

    #[test]
    fn textbook_problem() {
        // min -3x - 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), -36
        let mut lp = LinearProgram::new(vec![int(-3), int(-5)]);
        lp.push(vec![int(1), int(0)], Relation::Le, int(4));
        lp.push(vec![int(0), int(2)], Relation::Le, int(12));
        lp.push(vec![int(3), int(2)], Relation::Le, int(18));
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal {
                x: vec![int(2), int(6)],
                value: int(-36)
            }
        );
    }

    #[test]
    fn covering_problem_needs_phase_one() {
        // min x + y, x + 2y ≥ 3, 3x + y ≥ 4 → x = 1, y = 1
        let mut lp = LinearProgram::new(vec![int(1), int(1)]);
        lp.push(vec![int(1), int(2)], Relation::Ge, int(3));
        lp.push(vec![int(3), int(1)], Relation::Ge, int(4));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, int(2));
                assert_eq!(x, vec![int(1), int(1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![int(1)]);
        lp.push(vec![int(1)], Relation::Ge, int(3));
        lp.push(vec![int(1)], Relation::Le, int(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(vec![int(-1), int(0)]);
        lp.push(vec![int(1), int(-1)], Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_and_redundant_rows() {
        let mut lp = LinearProgram::new(vec![int(2), int(1)]);
        lp.push(vec![int(1), int(1)], Relation::Eq, int(3));
        lp.push(vec![int(2), int(2)], Relation::Eq, int(6));
        lp.push(vec![int(1), int(0)], Relation::Ge, ratio(1, 2));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![ratio(1, 2), ratio(5, 2)]);
                assert_eq!(value, ratio(7, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=3);
            let mut lp =
                LinearProgram::new((0..n).map(|_| ratio(rng.gen_range(-5..=6), 2)).collect());
            // box keeps every instance bounded
            for i in 0..n {
                let mut e = vec![int(0); n];
                e[i] = int(1);
                lp.push(e, Relation::Le, int(rng.gen_range(1..=6)));
            }
            for _ in 0..rng.gen_range(1..=4) {
                let coeffs = (0..n).map(|_| ratio(rng.gen_range(-4..=4), 3)).collect();
                let rel = match rng.gen_range(0..3) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                lp.push(coeffs, rel, ratio(rng.gen_range(-6..=6), 2));
            }
            let expected = brute_force(&lp);
            match (lp.solve(), expected) {
                (LpOutcome::Optimal { x, value }, Some(best)) => {
                    assert_eq!(value, best, "{lp:?}");
                    assert!(lp.is_feasible_point(&x));
                }
                (LpOutcome::Infeasible, None) => {}
                (got, want) => panic!("{lp:?}: simplex {got:?}, oracle {want:?}"),
            }
        }
    }
}
