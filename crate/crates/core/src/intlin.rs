//! Exact integer linear algebra: Smith and Hermite normal forms,
//! finitely generated abelian groups, lattice solving, abelian coset
//! intersection.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::GroupError;

/// Dense matrix of arbitrary-precision integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// col_j += q * col_k
    fn add_col(&mut self, j: usize, k: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, j) + q * self.get(i, k);
            self.set(i, j, v);
        }
    }

    /// row_i += q * row_k
    fn add_row(&mut self, i: usize, k: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(i, j) + q * self.get(k, j);
            self.set(i, j, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
                a.set(i, k, BigInt::zero());
            }
            prev = a.get(k, k).clone();
        }
        let d = a.get(n - 1, n - 1).clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Text format: first line "rows cols", then row-major integers.
    pub fn parse_text(s: &str) -> Result<Self, GroupError> {
        let mut it = s.split_whitespace();
        let rows: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GroupError::Invalid("missing row count".into()))?;
        let cols: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GroupError::Invalid("missing column count".into()))?;
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let tok = it.next().ok_or_else(|| {
                    GroupError::Invalid(format!("matrix entries exhausted at ({i},{j})"))
                })?;
                let v: BigInt = tok
                    .parse()
                    .map_err(|_| GroupError::Invalid(format!("bad integer {tok:?}")))?;
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Result of a Smith normal form computation: u * m * v = d.
pub struct Snf {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

/// Diagonalize by unimodular row/column operations; smallest-absolute-value
/// pivoting keeps coefficient growth in check. Diagonal entries non-negative.
fn diagonalize(d: &mut IntMatrix, u: &mut IntMatrix, v: &mut IntMatrix) {
    let rows = d.rows();
    let cols = d.cols();
    let n = rows.min(cols);
    for t in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !d.get(i, j).is_zero()
                        && pivot
                            .map(|(pi, pj)| d.get(i, j).abs() < d.get(pi, pj).abs())
                            .unwrap_or(true)
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            for i in t + 1..rows {
                if !d.get(i, t).is_zero() {
                    let q = -(d.get(i, t) / d.get(t, t));
                    d.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                }
            }
            for j in t + 1..cols {
                if !d.get(t, j).is_zero() {
                    let q = -(d.get(t, j) / d.get(t, t));
                    d.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                }
            }
            if (t + 1..rows).all(|i| d.get(i, t).is_zero())
                && (t + 1..cols).all(|j| d.get(t, j).is_zero())
            {
                break;
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
}

/// Smith normal form with unimodular transforms. Diagonal entries are
/// non-negative and form a divisibility chain.
pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let mut v = IntMatrix::identity(m.cols());
    let n = m.rows().min(m.cols());
    diagonalize(&mut d, &mut u, &mut v);
    // enforce d_i | d_{i+1}: coupling a violating pair and re-diagonalizing
    // replaces it by (gcd, lcm); the process terminates
    loop {
        let mut violated = false;
        for t in 0..n.saturating_sub(1) {
            let a = d.get(t, t).clone();
            let b = d.get(t + 1, t + 1).clone();
            let bad = if a.is_zero() {
                !b.is_zero()
            } else {
                !b.mod_floor(&a).is_zero()
            };
            if bad {
                d.add_col(t, t + 1, &BigInt::one());
                v.add_col(t, t + 1, &BigInt::one());
                violated = true;
            }
        }
        if !violated {
            return Snf { u, d, v };
        }
        diagonalize(&mut d, &mut u, &mut v);
    }
}

/// Column echelon (Hermite-style) form: m * u = h with u unimodular.
/// Pivot entries are positive; entries left of each pivot in its row are
/// reduced into [0, pivot); columns past the pivot count are zero.
pub struct ColEchelon {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// (row, col) of each pivot, rows strictly increasing.
    pub pivots: Vec<(usize, usize)>,
}

pub fn column_echelon(m: &IntMatrix) -> ColEchelon {
    let rows = m.rows();
    let cols = m.cols();
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut pivots = Vec::new();
    let mut c = 0usize;
    for r in 0..rows {
        if c >= cols {
            break;
        }
        if (c..cols).all(|j| h.get(r, j).is_zero()) {
            continue;
        }
        // gcd-eliminate within row r over columns c..
        loop {
            let mut best: Option<usize> = None;
            for j in c..cols {
                if !h.get(r, j).is_zero()
                    && best.map(|b| h.get(r, j).abs() < h.get(r, b).abs()).unwrap_or(true)
                {
                    best = Some(j);
                }
            }
            let b = best.unwrap();
            h.swap_cols(c, b);
            u.swap_cols(c, b);
            let mut done = true;
            for j in c + 1..cols {
                if !h.get(r, j).is_zero() {
                    let q = -(h.get(r, j) / h.get(r, c));
                    h.add_col(j, c, &q);
                    u.add_col(j, c, &q);
                    if !h.get(r, j).is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h.get(r, c).is_negative() {
            h.negate_col(c);
            u.negate_col(c);
        }
        // reduce entries to the left of the pivot
        let p = h.get(r, c).clone();
        for j in 0..c {
            let q = -h.get(r, j).div_floor(&p);
            if !q.is_zero() {
                h.add_col(j, c, &q);
                u.add_col(j, c, &q);
            }
        }
        pivots.push((r, c));
        c += 1;
    }
    ColEchelon { h, u, pivots }
}

impl ColEchelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of { x : m x = 0 }: the transform columns past the pivots.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        (self.rank()..self.u.cols())
            .map(|j| self.u.column(j))
            .collect()
    }

    /// Solve m x = b over the integers, if possible.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(b.len(), self.h.rows());
        let mut y = vec![BigInt::zero(); self.h.cols()];
        for &(r, c) in &self.pivots {
            let mut acc = b[r].clone();
            for j in 0..c {
                acc -= self.h.get(r, j) * &y[j];
            }
            let p = self.h.get(r, c);
            let (q, rem) = acc.div_rem(p);
            if !rem.is_zero() {
                return None;
            }
            y[c] = q;
        }
        // verify rows without pivots
        let check = self.h.mul_vec(&y);
        if check.iter().zip(b).any(|(x, t)| x != t) {
            return None;
        }
        Some(self.u.mul_vec(&y))
    }

    /// True if the columns of m span all of Z^rows.
    pub fn is_full_image(&self) -> bool {
        self.rank() == self.h.rows() && self.pivots.iter().all(|&(r, c)| self.h.get(r, c).is_one())
    }
}

/// Finitely generated abelian group in invariant-factor form.
///
/// Elements are integer vectors of length `rank + torsion.len()`: free
/// coordinates first, then torsion coordinates reduced mod the factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    rank: usize,
    torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn new(rank: usize, torsion: Vec<u64>) -> Self {
        Self::new_big(rank, torsion.into_iter().map(BigInt::from).collect())
    }

    pub fn new_big(rank: usize, torsion: Vec<BigInt>) -> Self {
        for w in torsion.windows(2) {
            assert!(w[1].mod_floor(&w[0]).is_zero(), "torsion chain must divide");
        }
        assert!(torsion.iter().all(|d| *d >= BigInt::from(2)));
        AbelianGroup { rank, torsion }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            rank,
            torsion: vec![],
        }
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    /// Number of integer coordinates in an element vector.
    pub fn dim(&self) -> usize {
        self.rank + self.torsion.len()
    }

    pub fn zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.dim()]
    }

    /// Canonical generator e_i.
    pub fn generator(&self, i: usize) -> Vec<BigInt> {
        let mut v = self.zero();
        v[i] = BigInt::one();
        v
    }

    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim());
        let mut out = v.to_vec();
        for (k, d) in self.torsion.iter().enumerate() {
            let i = self.rank + k;
            out[i] = out[i].mod_floor(d);
        }
        out
    }

    pub fn add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let sum: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&sum)
    }

    pub fn neg(&self, a: &[BigInt]) -> Vec<BigInt> {
        let n: Vec<BigInt> = a.iter().map(|x| -x).collect();
        self.reduce(&n)
    }

    pub fn scalar(&self, k: &BigInt, a: &[BigInt]) -> Vec<BigInt> {
        let v: Vec<BigInt> = a.iter().map(|x| k * x).collect();
        self.reduce(&v)
    }

    pub fn is_zero(&self, a: &[BigInt]) -> bool {
        self.reduce(a).iter().all(|x| x.is_zero())
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        // re-canonicalize the combined torsion via SNF of a diagonal matrix
        let all: Vec<BigInt> = self
            .torsion
            .iter()
            .chain(other.torsion.iter())
            .cloned()
            .collect();
        let n = all.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, d) in all.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        let snf = smith_normal_form(&m);
        let torsion: Vec<BigInt> = (0..n)
            .map(|i| snf.d.get(i, i).clone())
            .filter(|d| *d >= BigInt::from(2))
            .collect();
        AbelianGroup::new_big(self.rank + other.rank, torsion)
    }

    pub fn order(&self) -> Option<BigInt> {
        if self.rank > 0 {
            return None;
        }
        Some(self.torsion.iter().product::<BigInt>().max(BigInt::one()))
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AbelianGroup", 2)?;
        st.serialize_field("rank", &self.rank)?;
        let t: Vec<u64> = self
            .torsion
            .iter()
            .map(|d| u64::try_from(d.clone()).map_err(|_| serde::ser::Error::custom("torsion too large")))
            .collect::<Result<_, _>>()?;
        st.serialize_field("torsion", &t)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for AbelianGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            rank: usize,
            #[serde(default)]
            torsion: Vec<u64>,
        }
        let r = Repr::deserialize(d)?;
        Ok(AbelianGroup::new(r.rank, r.torsion))
    }
}

impl std::fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.rank == 1 {
            parts.push("Z".into());
        } else if self.rank > 1 {
            parts.push(format!("Z^{}", self.rank));
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Homomorphism between f.g. abelian groups, as a matrix on canonical
/// generators (columns = source generators, rows = target coordinates).
#[derive(Clone, Debug)]
pub struct AbelianHom {
    pub source: AbelianGroup,
    pub target: AbelianGroup,
    pub matrix: IntMatrix,
}

impl AbelianHom {
    pub fn new(
        source: AbelianGroup,
        target: AbelianGroup,
        matrix: IntMatrix,
    ) -> Result<Self, GroupError> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(GroupError::Invalid(format!(
                "hom matrix {}x{} does not match target dim {} x source dim {}",
                matrix.rows(),
                matrix.cols(),
                target.dim(),
                source.dim()
            )));
        }
        let hom = AbelianHom {
            source,
            target,
            matrix,
        };
        // well-definedness: each source torsion relation maps to zero
        for (k, d) in hom.source.torsion().iter().enumerate() {
            let i = hom.source.rank() + k;
            let img = hom.apply(&hom.source.scalar(d, &hom.source.generator(i)));
            let direct = hom
                .target
                .scalar(d, &hom.target.reduce(&hom.matrix.column(i)));
            if !hom.target.is_zero(&direct) || !hom.target.is_zero(&img) {
                return Err(GroupError::Invalid(format!(
                    "torsion relation {d} * e_{i} does not map to zero"
                )));
            }
        }
        Ok(hom)
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.target.reduce(&self.matrix.mul_vec(v))
    }

    /// True if the image is the whole target.
    pub fn is_surjective(&self) -> bool {
        // image = span(columns) + torsion relations of the target
        let aug = augment_with_target_torsion(&self.matrix, &self.target);
        let ech = column_echelon(&aug);
        if ech.rank() < self.target.dim() {
            return false;
        }
        // surjective iff every canonical generator is hit
        (0..self.target.dim()).all(|i| ech.solve(&self.target.generator(i)).is_some())
    }
}

/// Append columns d_i * e_i for each torsion coordinate of `target`, so that
/// integer solving modulo the target's relations becomes plain lattice solving.
fn augment_with_target_torsion(m: &IntMatrix, target: &AbelianGroup) -> IntMatrix {
    let extra = target.torsion().len();
    let mut out = IntMatrix::zeros(m.rows(), m.cols() + extra);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, m.get(i, j).clone());
        }
    }
    for (k, d) in target.torsion().iter().enumerate() {
        out.set(target.rank() + k, m.cols() + k, d.clone());
    }
    out
}

/// Cokernel of a relation matrix (rows = relators, cols = generators),
/// together with the projection sending generator basis vectors to
/// canonical coordinates.
pub fn cokernel(m: &IntMatrix) -> (AbelianGroup, AbelianHom) {
    let gens = m.cols();
    let n = m.transpose(); // columns = relators, acting on Z^gens
    let snf = smith_normal_form(&n);
    let diag: Vec<BigInt> = (0..gens.min(n.cols()))
        .map(|i| snf.d.get(i, i).clone())
        .collect();

    let mut free_rows: Vec<usize> = Vec::new();
    let mut torsion_rows: Vec<(usize, BigInt)> = Vec::new();
    for i in 0..gens {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            free_rows.push(i);
        } else if d > BigInt::one() {
            torsion_rows.push((i, d));
        }
    }
    let torsion: Vec<BigInt> = torsion_rows.iter().map(|(_, d)| d.clone()).collect();
    let group = AbelianGroup::new_big(free_rows.len(), torsion);

    // coordinates of x in the cokernel are the selected rows of U x
    let mut proj = IntMatrix::zeros(group.dim(), gens);
    for (out_i, &i) in free_rows.iter().enumerate() {
        for j in 0..gens {
            proj.set(out_i, j, snf.u.get(i, j).clone());
        }
    }
    for (out_k, &(i, _)) in torsion_rows.iter().enumerate() {
        for j in 0..gens {
            proj.set(free_rows.len() + out_k, j, snf.u.get(i, j).clone());
        }
    }
    let hom = AbelianHom::new(AbelianGroup::free(gens), group.clone(), proj)
        .expect("projection is always well-defined on a free source");
    (group, hom)
}

/// Kernel of a hom from a free abelian source: returns the kernel rank and
/// a lattice basis inside the source.
pub fn hom_kernel(phi: &AbelianHom) -> Result<(AbelianGroup, Vec<Vec<BigInt>>), GroupError> {
    if !phi.source.is_free() {
        return Err(GroupError::NonFreeSource);
    }
    let r = phi.source.rank();
    let aug = augment_with_target_torsion(&phi.matrix, &phi.target);
    let ech = column_echelon(&aug);
    let raw: Vec<Vec<BigInt>> = ech
        .kernel_basis()
        .into_iter()
        .map(|v| v[..r].to_vec())
        .collect();
    // canonical basis of the projected lattice via column echelon
    let mut gen = IntMatrix::zeros(r, raw.len());
    for (j, v) in raw.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            gen.set(i, j, x.clone());
        }
    }
    let ech2 = column_echelon(&gen);
    let basis: Vec<Vec<BigInt>> = (0..ech2.rank()).map(|j| ech2.h.column(j)).collect();
    Ok((AbelianGroup::free(basis.len()), basis))
}

/// Witness that (q + <S>) meets <T>: q + s_comb = t_comb.
#[derive(Clone, Debug)]
pub struct CosetWitness {
    pub s_coeffs: Vec<BigInt>,
    pub t_coeffs: Vec<BigInt>,
    pub s_comb: Vec<BigInt>,
    pub t_comb: Vec<BigInt>,
}

/// Decide whether the coset q + <S> intersects <T> in `ambient`.
pub fn coset_intersects(
    q: &[BigInt],
    s_gens: &[Vec<BigInt>],
    t_gens: &[Vec<BigInt>],
    ambient: &AbelianGroup,
) -> Option<CosetWitness> {
    let dim = ambient.dim();
    assert_eq!(q.len(), dim);
    let k = t_gens.len();
    let m = s_gens.len();
    let extra = ambient.torsion().len();
    let mut a = IntMatrix::zeros(dim, k + m + extra);
    for (j, t) in t_gens.iter().enumerate() {
        for i in 0..dim {
            a.set(i, j, t[i].clone());
        }
    }
    for (j, s) in s_gens.iter().enumerate() {
        for i in 0..dim {
            a.set(i, k + j, -&s[i]);
        }
    }
    for (e, d) in ambient.torsion().iter().enumerate() {
        a.set(ambient.rank() + e, k + m + e, d.clone());
    }
    let ech = column_echelon(&a);
    let z = ech.solve(q)?;
    let t_coeffs = z[..k].to_vec();
    let s_coeffs = z[k..k + m].to_vec();
    let mut s_comb = ambient.zero();
    for (c, s) in s_coeffs.iter().zip(s_gens) {
        s_comb = ambient.add(&s_comb, &ambient.scalar(c, s));
    }
    let mut t_comb = ambient.zero();
    for (c, t) in t_coeffs.iter().zip(t_gens) {
        t_comb = ambient.add(&t_comb, &ambient.scalar(c, t));
    }
    debug_assert_eq!(ambient.add(q, &s_comb), t_comb);
    Some(CosetWitness {
        s_coeffs,
        t_coeffs,
        s_comb,
        t_comb,
    })
}

/// Membership of q in the subgroup generated by `gens`.
pub fn in_span(q: &[BigInt], gens: &[Vec<BigInt>], ambient: &AbelianGroup) -> Option<Vec<BigInt>> {
    let dim = ambient.dim();
    let extra = ambient.torsion().len();
    let mut a = IntMatrix::zeros(dim, gens.len() + extra);
    for (j, g) in gens.iter().enumerate() {
        for i in 0..dim {
            a.set(i, j, g[i].clone());
        }
    }
    for (e, d) in ambient.torsion().iter().enumerate() {
        a.set(ambient.rank() + e, gens.len() + e, d.clone());
    }
    column_echelon(&a)
        .solve(q)
        .map(|z| z[..gens.len()].to_vec())
}
