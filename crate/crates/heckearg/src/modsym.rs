//! Manin symbols for Γ₀(q), q prime, modulo the two- and three-term relations and
//! the star involution, with Heilbronn and Atkin–Lehner actions.

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::arith::{is_prime, mod_inverse};
use crate::error::{invalid, Error, Result};

pub type Rational = Ratio<i128>;

/// Largest level accepted by default.
pub const DEFAULT_Q_MAX: u64 = 5003;

const MODULUS: u64 = (1 << 61) - 1;

/// dim S₂(Γ₀(q)) for prime q, the genus of X₀(q).
pub fn dimension(q: u64) -> Result<usize> {
    if !is_prime(q) {
        return Err(invalid(format!("level {q} is not prime")));
    }
    let legendre_minus_one = match q {
        2 => 0,
        _ if q % 4 == 1 => 1,
        _ => -1,
    };
    let legendre_minus_three = match q {
        3 => 0,
        _ if q % 3 == 1 => 1,
        _ => -1,
    };
    let nu2 = 1 + legendre_minus_one;
    let nu3 = 1 + legendre_minus_three;
    let twelve_g = q as i64 + 1 - 3 * nu2 - 4 * nu3;
    Ok((twelve_g / 12).max(0) as usize)
}

/// Heilbronn matrices of determinant p as [x1, x2, y1, y2], acting on the right of
/// (u:v) by (u·x1 + v·y1 : u·x2 + v·y2).
pub fn heilbronn(p: u64) -> Vec<[i64; 4]> {
    let p = p as i64;
    if p == 2 {
        return vec![[1, 0, 0, 2], [2, 0, 0, 1], [2, 1, 0, 1], [1, 0, 1, 2]];
    }
    let mut out = vec![[1, 0, 0, p]];
    let half = p / 2;
    for r in -half..=half {
        let (mut x1, mut x2, mut y1, mut y2) = (p, -r, 0i64, 1i64);
        let (mut a, mut b) = (-p, r);
        out.push([x1, x2, y1, y2]);
        while b != 0 {
            let quot = round_div(a, b);
            let rem = a - b * quot;
            a = -b;
            b = rem;
            let x3 = quot * x2 - x1;
            x1 = x2;
            x2 = x3;
            let y3 = quot * y2 - y1;
            y1 = y2;
            y2 = y3;
            out.push([x1, x2, y1, y2]);
        }
    }
    out
}

/// Nearest integer to a/b, halves rounded away from zero.
fn round_div(a: i64, b: i64) -> i64 {
    let (num, den) = if b < 0 { (-a, -b) } else { (a, b) };
    let twice = 2 * num;
    if twice >= 0 {
        (twice + den) / (2 * den)
    } else {
        -((-twice + den) / (2 * den))
    }
}

/// Points of P¹(F_q): (1:d) has index d, (0:1) has index q.
#[derive(Debug, Clone)]
struct ProjectiveLine {
    q: i64,
    inverse: Vec<i64>,
}

impl ProjectiveLine {
    fn new(q: u64) -> Self {
        let qi = q as i64;
        let mut inverse = vec![0; q as usize];
        for (c, slot) in inverse.iter_mut().enumerate().skip(1) {
            *slot = mod_inverse(c as i64, qi).expect("prime modulus");
        }
        Self { q: qi, inverse }
    }

    fn len(&self) -> usize {
        self.q as usize + 1
    }

    fn index(&self, c: i64, d: i64) -> usize {
        let c = c.rem_euclid(self.q);
        let d = d.rem_euclid(self.q);
        if c == 0 {
            debug_assert!(d != 0, "(0:0) is not a point");
            self.q as usize
        } else {
            ((d * self.inverse[c as usize]) % self.q) as usize
        }
    }

    fn point(&self, idx: usize) -> (i64, i64) {
        if idx == self.q as usize {
            (0, 1)
        } else {
            (1, idx as i64)
        }
    }
}

/// Signed union-find: each symbol is ± its root, or zero.
struct SignedUnion {
    parent: Vec<usize>,
    sign: Vec<i8>,
    zero: Vec<bool>,
}

impl SignedUnion {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), sign: vec![1; n], zero: vec![false; n] }
    }

    fn find(&mut self, i: usize) -> (usize, i8) {
        let p = self.parent[i];
        if p == i {
            return (i, 1);
        }
        let (root, s) = self.find(p);
        self.parent[i] = root;
        self.sign[i] *= s;
        (root, self.sign[i])
    }

    /// Impose x_i = s·x_j.
    fn union(&mut self, i: usize, j: usize, s: i8) {
        let (ri, si) = self.find(i);
        let (rj, sj) = self.find(j);
        if ri == rj {
            if si != s * sj {
                self.zero[ri] = true;
            }
            return;
        }
        // x_ri = si·x_i = si·s·sj·x_rj
        self.parent[ri] = rj;
        self.sign[ri] = si * s * sj;
        if self.zero[ri] {
            self.zero[rj] = true;
        }
    }
}

/// Sparse rational vector over the free generators.
pub type SparseVector = Vec<(usize, Rational)>;

#[derive(Debug, Clone)]
pub struct ManinSymbolSpace {
    q: u64,
    line: ProjectiveLine,
    /// Per symbol: `None` if the symbol is zero in the quotient, else (sign, representative).
    class: Vec<Option<(i8, usize)>>,
    /// Representative symbol of each class, in increasing order.
    representatives: Vec<usize>,
    /// Sparse integer rows of the three-term relations over representatives.
    relation_matrix: Vec<Vec<(usize, i64)>>,
    /// Coordinates of each representative in the free generators.
    rep_coords: Vec<SparseVector>,
    /// Representative index of each free generator.
    generators: Vec<usize>,
    /// Generator carrying the boundary ({0,∞}); the cuspidal part is the span of the others.
    boundary_generator: Option<usize>,
    cuspidal_dim: usize,
}

impl ManinSymbolSpace {
    pub fn build(q: u64) -> Result<Self> {
        Self::build_with_limit(q, DEFAULT_Q_MAX)
    }

    pub fn build_with_limit(q: u64, q_max: u64) -> Result<Self> {
        let genus = dimension(q)?;
        if q > q_max {
            return Err(invalid(format!("level {q} exceeds q_max {q_max}")));
        }
        let line = ProjectiveLine::new(q);
        let n = line.len();
        let mut uf = SignedUnion::new(n);
        for i in 0..n {
            let (c, d) = line.point(i);
            uf.union(i, line.index(d, -c), -1);
            uf.union(i, line.index(-c, d), 1);
        }
        let mut class_root = vec![None; n];
        let mut roots = BTreeSet::new();
        for (i, slot) in class_root.iter_mut().enumerate() {
            let (root, s) = uf.find(i);
            if !uf.zero[root] {
                *slot = Some((s, root));
                roots.insert(root);
            }
        }
        let representatives: Vec<usize> = roots.into_iter().collect();
        let rep_index = |root: usize| representatives.binary_search(&root).expect("root listed");
        let class: Vec<Option<(i8, usize)>> =
            class_root.iter().map(|c| c.map(|(s, root)| (s, rep_index(root)))).collect();

        let mut relations = BTreeSet::new();
        for i in 0..n {
            let (c, d) = line.point(i);
            let terms = [i, line.index(d, -c - d), line.index(-c - d, c)];
            let mut row: Vec<(usize, i64)> = Vec::new();
            for t in terms {
                if let Some((s, r)) = class[t] {
                    match row.iter_mut().find(|(k, _)| *k == r) {
                        Some(entry) => entry.1 += s as i64,
                        None => row.push((r, s as i64)),
                    }
                }
            }
            row.retain(|&(_, v)| v != 0);
            if row.is_empty() {
                continue;
            }
            row.sort();
            if row[0].1 < 0 {
                row.iter_mut().for_each(|e| e.1 = -e.1);
            }
            relations.insert(row);
        }
        let relation_matrix: Vec<Vec<(usize, i64)>> = relations.into_iter().collect();

        let (rep_coords, generators) = solve_relations(representatives.len(), &relation_matrix)?;

        let boundary_generator = class[q as usize].and_then(|(_, r)| {
            let coords = &rep_coords[r];
            (coords.len() == 1).then(|| coords[0].0)
        });
        let plus_dim = generators.len();
        let cuspidal_dim = if boundary_generator.is_some() { plus_dim - 1 } else { plus_dim };
        if cuspidal_dim != genus {
            return Err(Error::Numerical(format!(
                "level {q}: cuspidal dimension {cuspidal_dim} differs from genus {genus}"
            )));
        }
        let space = Self {
            q,
            line,
            class,
            representatives,
            relation_matrix,
            rep_coords,
            generators,
            boundary_generator,
            cuspidal_dim,
        };
        space.verify_relations()?;
        Ok(space)
    }

    pub fn level(&self) -> u64 {
        self.q
    }

    pub fn symbol_count(&self) -> usize {
        self.line.len()
    }

    pub fn cuspidal_dim(&self) -> usize {
        self.cuspidal_dim
    }

    pub fn plus_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn relation_matrix(&self) -> &[Vec<(usize, i64)>] {
        &self.relation_matrix
    }

    pub fn boundary_generator(&self) -> Option<usize> {
        self.boundary_generator
    }

    /// The Manin symbol (c:d) with index `idx`.
    pub fn symbol(&self, idx: usize) -> (i64, i64) {
        self.line.point(idx)
    }

    pub fn symbol_index(&self, c: i64, d: i64) -> usize {
        self.line.index(c, d)
    }

    /// Symbol index of the representative behind free generator `g`.
    pub fn generator_symbol(&self, g: usize) -> usize {
        self.representatives[self.generators[g]]
    }

    /// Coordinates of a Manin symbol in the free generators.
    pub fn coords(&self, idx: usize) -> SparseVector {
        match self.class[idx] {
            None => Vec::new(),
            Some((s, r)) => self.rep_coords[r]
                .iter()
                .map(|(k, v)| (*k, *v * Rational::from_integer(s as i128)))
                .collect(),
        }
    }

    /// Dense floating coordinates of every symbol, row-major (symbol, generator).
    pub fn coords_table(&self) -> Vec<Vec<f64>> {
        (0..self.symbol_count())
            .map(|idx| {
                let mut row = vec![0.0; self.plus_dim()];
                for (k, v) in self.coords(idx) {
                    row[k] = *v.numer() as f64 / *v.denom() as f64;
                }
                row
            })
            .collect()
    }

    /// Symbol indices of (c:d)·h over the Heilbronn matrices h of determinant p.
    pub fn heilbronn_images(&self, idx: usize, mats: &[[i64; 4]]) -> impl Iterator<Item = usize> + '_ {
        let (c, d) = self.line.point(idx);
        let q = self.q as i64;
        let mats: Vec<[i64; 4]> = mats.to_vec();
        mats.into_iter().filter_map(move |[x1, x2, y1, y2]| {
            let u = (c * x1 + d * y1).rem_euclid(q);
            let v = (c * x2 + d * y2).rem_euclid(q);
            (u != 0 || v != 0).then(|| self.line.index(u, v))
        })
    }

    /// Exact matrix of T_p on the plus quotient; column j is the image of generator j.
    pub fn hecke_matrix_plus(&self, p: u64) -> Result<Vec<Vec<Rational>>> {
        if !is_prime(p) || p == self.q {
            return Err(invalid(format!("T_p needs a prime p != q, got {p}")));
        }
        let mats = heilbronn(p);
        let dim = self.plus_dim();
        let mut cols = Vec::with_capacity(dim);
        for g in 0..dim {
            let mut col = vec![Rational::zero(); dim];
            for image in self.heilbronn_images(self.generator_symbol(g), &mats) {
                for (k, v) in self.coords(image) {
                    col[k] += v;
                }
            }
            cols.push(col);
        }
        Ok(transpose(&cols))
    }

    /// Exact matrix of the Atkin–Lehner involution z ↦ −1/(qz) on the plus quotient.
    pub fn atkin_lehner_plus(&self) -> Vec<Vec<Rational>> {
        let dim = self.plus_dim();
        let mut cols = Vec::with_capacity(dim);
        for g in 0..dim {
            let mut col = vec![Rational::zero(); dim];
            for (idx, s) in self.atkin_lehner_image(self.generator_symbol(g)) {
                for (k, v) in self.coords(idx) {
                    col[k] += v * Rational::from_integer(s as i128);
                }
            }
            cols.push(col);
        }
        transpose(&cols)
    }

    /// W_q applied to the Manin symbol `idx`, as a signed list of Manin symbols.
    pub fn atkin_lehner_image(&self, idx: usize) -> Vec<(usize, i64)> {
        let (c, d) = self.line.point(idx);
        let q = self.q as i64;
        if c == 0 {
            // {0,∞} ↦ {∞,0}
            return vec![(self.line.index(1, 0), 1)];
        }
        if d == 0 {
            // {∞,0} ↦ {0,∞}
            return vec![(self.line.index(0, 1), 1)];
        }
        // (1:d) = {−1/d, 0} ↦ {d/q, ∞} = {0,∞} − {0, d/q}
        let mut out = vec![(self.line.index(0, 1), 1)];
        for (sym, s) in self.path_from_zero(d, q) {
            out.push((sym, -s));
        }
        out
    }

    /// {0, a/b} as a sum of Manin symbols via continued-fraction convergents.
    pub fn path_from_zero(&self, a: i64, b: i64) -> Vec<(usize, i64)> {
        let mut out = vec![(self.line.index(0, 1), 1)];
        let (mut num, mut den) = (a, b);
        let (mut q_prev2, mut q_prev1) = (1i64, 0i64);
        let mut j = 0;
        while den != 0 {
            let partial = num.div_euclid(den);
            let rem = num.rem_euclid(den);
            let q_j = partial * q_prev1 + q_prev2;
            let sign = if j % 2 == 1 { 1 } else { -1 };
            out.push((self.line.index(sign * q_j, q_prev1), 1));
            (q_prev2, q_prev1) = (q_prev1, q_j);
            (num, den) = (den, rem);
            j += 1;
        }
        out
    }

    fn verify_relations(&self) -> Result<()> {
        for row in &self.relation_matrix {
            let mut acc = vec![Rational::zero(); self.plus_dim()];
            for &(r, v) in row {
                for (k, x) in &self.rep_coords[r] {
                    acc[*k] += *x * Rational::from_integer(v as i128);
                }
            }
            if acc.iter().any(|x| !x.is_zero()) {
                return Err(Error::Numerical(format!(
                    "level {}: relation not satisfied after solving",
                    self.q
                )));
            }
        }
        Ok(())
    }

    /// Exact integer matrix of T_p on the cuspidal subspace (basis: the non-boundary generators).
    pub fn hecke_matrix(&self, p: u64) -> Result<Vec<Vec<i64>>> {
        let full = self.hecke_matrix_plus(p)?;
        let keep: Vec<usize> =
            (0..self.plus_dim()).filter(|&k| Some(k) != self.boundary_generator).collect();
        if let Some(b) = self.boundary_generator {
            if keep.iter().any(|&j| !full[b][j].is_zero()) {
                return Err(Error::Numerical("T_p does not preserve cusp forms".into()));
            }
        }
        let mut out = Vec::with_capacity(keep.len());
        for &i in &keep {
            let mut row = Vec::with_capacity(keep.len());
            for &j in &keep {
                let v = full[i][j];
                if !v.is_integer() {
                    return Err(Error::Numerical(format!("T_{p} entry {v} is not integral")));
                }
                row.push(i64::try_from(v.to_integer()).map_err(|_| Error::Numerical("overflow".into()))?);
            }
            out.push(row);
        }
        Ok(out)
    }
}

fn transpose(cols: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = cols.len();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    r
}

fn to_mod(v: i64) -> u64 {
    v.rem_euclid(MODULUS as i64) as u64
}

/// Smallest-height rational congruent to `u` modulo the working prime.
fn rational_reconstruct(u: u64) -> Option<Rational> {
    let bound = ((MODULUS / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (MODULUS as i128, u as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    Some(Rational::new(r1, t1))
}

/// Row-reduce the relations modulo a large prime and lift the solution to the rationals.
/// Returns coordinates of every representative and the list of free representatives.
fn solve_relations(cols: usize, rows: &[Vec<(usize, i64)>]) -> Result<(Vec<SparseVector>, Vec<usize>)> {
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| {
            let mut dense = vec![0u64; cols];
            for &(k, v) in row {
                dense[k] = to_mod(v);
            }
            dense
        })
        .collect();
    let mut pivot_of_col = vec![None; cols];
    let mut rank = 0;
    for col in 0..cols {
        let Some(found) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, found);
        let inv = pow_mod(mat[rank][col], MODULUS - 2);
        for x in mat[rank].iter_mut() {
            *x = mul_mod(*x, inv);
        }
        let pivot_row = mat[rank].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for k in col..cols {
                if pivot_row[k] != 0 {
                    let sub = mul_mod(factor, pivot_row[k]);
                    row[k] = (row[k] + MODULUS - sub) % MODULUS;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|&c| pivot_of_col[c].is_none()).collect();
    let mut gen_of_col = vec![usize::MAX; cols];
    for (g, &c) in free.iter().enumerate() {
        gen_of_col[c] = g;
    }
    let mut coords = Vec::with_capacity(cols);
    for col in 0..cols {
        match pivot_of_col[col] {
            None => coords.push(vec![(gen_of_col[col], Rational::one())]),
            Some(r) => {
                let mut v = Vec::new();
                for &fc in &free {
                    let entry = mat[r][fc];
                    if entry != 0 {
                        let value = rational_reconstruct(entry).ok_or_else(|| {
                            Error::Numerical("rational reconstruction failed".into())
                        })?;
                        v.push((gen_of_col[fc], -value));
                    }
                }
                coords.push(v);
            }
        }
    }
    Ok((coords, free))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_div_half_away() {
        assert_eq!(round_div(5, 2), 3);
        assert_eq!(round_div(-5, 2), -3);
        assert_eq!(round_div(5, -2), -3);
        assert_eq!(round_div(7, 3), 2);
        assert_eq!(round_div(-7, 3), -2);
    }

    #[test]
    fn reconstruct_small_fractions() {
        let inv3 = pow_mod(3, MODULUS - 2);
        assert_eq!(rational_reconstruct(mul_mod(2, inv3)), Some(Rational::new(2, 3)));
        assert_eq!(rational_reconstruct(to_mod(-5)), Some(Rational::from_integer(-5)));
    }
}
