//! Finite presentations, finite groups by multiplication table,
//! abelianization and Reidemeister-Schreier rewriting.

use crate::error::GroupError;
use crate::intlin::{cokernel, AbelianGroup, AbelianHom, IntMatrix};
use crate::words::{Alphabet, Word};

/// Finite presentation on a ranked alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinPresentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
}

impl FinPresentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Self {
        let relators: Vec<Word> = relators.into_iter().filter(|r| !r.is_identity()).collect();
        for r in &relators {
            assert!(r.max_letter() <= alphabet.rank(), "relator letter out of range");
        }
        FinPresentation { alphabet, relators }
    }

    pub fn free(rank: u32) -> Self {
        FinPresentation {
            alphabet: Alphabet::new(rank),
            relators: vec![],
        }
    }

    /// Exponent-sum matrix of the relators (rows = relators, cols = generators).
    pub fn relation_matrix(&self) -> IntMatrix {
        let rows: Vec<Vec<i64>> = self
            .relators
            .iter()
            .map(|r| r.exponent_sums(self.alphabet.rank()))
            .collect();
        if rows.is_empty() {
            IntMatrix::zeros(0, self.alphabet.rank() as usize)
        } else {
            IntMatrix::from_rows(&rows)
        }
    }

    /// Abelianization, with the projection from the generator lattice.
    pub fn abelianize(&self) -> (AbelianGroup, AbelianHom) {
        cokernel(&self.relation_matrix())
    }
}

/// Direct product presentation: disjoint alphabets, union of relators,
/// plus all inter-factor commutators of generators.
pub fn direct_product_presentation(factors: &[FinPresentation]) -> FinPresentation {
    let total: u32 = factors.iter().map(|p| p.alphabet.rank()).sum();
    let mut relators = Vec::new();
    let mut offset: i32 = 0;
    let mut offsets = Vec::new();
    for p in factors {
        offsets.push(offset);
        for r in &p.relators {
            let shifted: Vec<i32> = r
                .letters()
                .iter()
                .map(|&x| if x > 0 { x + offset } else { x - offset })
                .collect();
            relators.push(Word::reduce(&shifted));
        }
        offset += p.alphabet.rank() as i32;
    }
    for (i, p) in factors.iter().enumerate() {
        for (j, q) in factors.iter().enumerate().skip(i + 1) {
            for a in 1..=(p.alphabet.rank() as i32) {
                for b in 1..=(q.alphabet.rank() as i32) {
                    let x = Word::reduce(&[a + offsets[i]]);
                    let y = Word::reduce(&[b + offsets[j]]);
                    relators.push(Word::commutator(&x, &y));
                }
            }
        }
    }
    FinPresentation::new(Alphabet::new(total), relators)
}

/// Finite group given by a multiplication table. Element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    name: String,
}

impl FiniteGroup {
    /// Validates the Latin-square property and associativity.
    pub fn from_table(table: Vec<Vec<usize>>, name: impl Into<String>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return Err(GroupError::Invalid("table must be square and nonempty".into()));
        }
        for i in 0..n {
            if table[0][i] != i || table[i][0] != i {
                return Err(GroupError::Invalid("element 0 must be the identity".into()));
            }
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for j in 0..n {
                if table[i][j] >= n || table[j][i] >= n {
                    return Err(GroupError::Invalid("table entry out of range".into()));
                }
                if std::mem::replace(&mut seen_row[table[i][j]], true)
                    || std::mem::replace(&mut seen_col[table[j][i]], true)
                {
                    return Err(GroupError::Invalid("table is not a Latin square".into()));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::Invalid(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let mut inverse = vec![0usize; n];
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == 0)
                .ok_or_else(|| GroupError::Invalid(format!("element {a} has no inverse")))?;
            inverse[a] = inv;
        }
        Ok(FiniteGroup {
            table,
            inverse,
            name: name.into(),
        })
    }

    pub fn trivial() -> Self {
        Self::from_table(vec![vec![0]], "1").unwrap()
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::from_table(table, format!("Z/{n}")).unwrap()
    }

    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order(), b.order());
        let idx = |x: usize, y: usize| x * nb + y;
        let n = na * nb;
        let mut table = vec![vec![0usize; n]; n];
        for x1 in 0..na {
            for y1 in 0..nb {
                for x2 in 0..na {
                    for y2 in 0..nb {
                        table[idx(x1, y1)][idx(x2, y2)] =
                            idx(a.mul(x1, x2), b.mul(y1, y2));
                    }
                }
            }
        }
        Self::from_table(table, format!("{}x{}", a.name, b.name)).unwrap()
    }

    /// The symmetric group S3 of order 6, generated by the transpositions
    /// (12) and (23) (elements 1 and 2).
    pub fn symmetric3() -> Self {
        // elements as permutations of {0,1,2} in a fixed listing
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let compose = |p: &[usize; 3], q: &[usize; 3]| -> [usize; 3] {
            [p[q[0]], p[q[1]], p[q[2]]]
        };
        let find = |p: &[usize; 3]| perms.iter().position(|x| x == p).unwrap();
        let table = perms
            .iter()
            .map(|p| perms.iter().map(|q| find(&compose(p, q))).collect())
            .collect();
        Self::from_table(table, "S3").unwrap()
    }

    /// Dihedral group of order 2n: rotations 0..n, reflections n..2n.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 2);
        let order = 2 * n;
        let mut table = vec![vec![0usize; order]; order];
        for a in 0..order {
            for b in 0..order {
                let (ra, fa) = (a % n, a >= n);
                let (rb, fb) = (b % n, b >= n);
                // (r^ra f^fa)(r^rb f^fb) with f r = r^-1 f
                let rot = if fa { (ra + n - rb) % n } else { (ra + rb) % n };
                let flip = fa ^ fb;
                table[a][b] = rot + if flip { n } else { 0 };
            }
        }
        Self::from_table(table, format!("D{n}")).unwrap()
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.clone()
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Evaluate a free word under letter images.
    pub fn eval_word(&self, images: &[usize], w: &Word) -> usize {
        let mut acc = 0usize;
        for &x in w.letters() {
            let g = images[(x.unsigned_abs() - 1) as usize];
            let g = if x > 0 { g } else { self.inv(g) };
            acc = self.mul(acc, g);
        }
        acc
    }

    /// Subgroup generated by the given elements (closure).
    pub fn subgroup_closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut in_sub = vec![false; self.order()];
        in_sub[0] = true;
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                for y in [self.mul(x, g), self.mul(x, self.inv(g))] {
                    if !in_sub[y] {
                        in_sub[y] = true;
                        frontier.push(y);
                    }
                }
            }
        }
        (0..self.order()).filter(|&i| in_sub[i]).collect()
    }

    /// Invariant factors, defined only for abelian tables.
    pub fn abelian_invariants(&self) -> Option<AbelianGroup> {
        if !self.is_abelian() {
            return None;
        }
        // relations: order(g) * g = 0 and g + h = (gh); present on all elements
        let n = self.order();
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let mut row = vec![0i64; n];
                row[a] += 1;
                row[b] += 1;
                row[self.mul(a, b)] -= 1;
                rows.push(row);
            }
        }
        let (g, _) = cokernel(&IntMatrix::from_rows(&rows));
        Some(g)
    }
}

/// Complete coset table: `table[coset][letter-1]` is the target coset under a
/// positive letter; coset 0 is the subgroup itself.
#[derive(Clone, Debug)]
pub struct CosetTable {
    pub rank: u32,
    pub table: Vec<Vec<usize>>,
}

impl CosetTable {
    pub fn new(rank: u32, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        for (i, row) in table.iter().enumerate() {
            if row.len() != rank as usize {
                return Err(GroupError::IncompleteTable {
                    coset: i,
                    letter: row.len() as u32 + 1,
                });
            }
            for &t in row {
                if t >= n {
                    return Err(GroupError::Invalid(format!("coset {t} out of range")));
                }
            }
        }
        // each letter must act by a permutation
        for l in 0..rank as usize {
            let mut seen = vec![false; n];
            for row in &table {
                if std::mem::replace(&mut seen[row[l]], true) {
                    return Err(GroupError::Invalid(format!(
                        "letter {} does not act by a permutation",
                        l + 1
                    )));
                }
            }
        }
        Ok(CosetTable { rank, table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn act(&self, coset: usize, letter: i32) -> usize {
        if letter > 0 {
            self.table[coset][(letter - 1) as usize]
        } else {
            let l = (-letter - 1) as usize;
            self.table.iter().position(|row| row[l] == coset).unwrap()
        }
    }

    /// Breadth-first Schreier spanning tree: for each coset != 0, the
    /// (parent coset, positive-letter-or-inverse) edge reaching it.
    pub fn schreier_tree(&self) -> Vec<Option<(usize, i32)>> {
        let n = self.len();
        let mut parent: Vec<Option<(usize, i32)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            for l in 1..=(self.rank as i32) {
                for letter in [l, -l] {
                    let t = self.act(c, letter);
                    if !seen[t] {
                        seen[t] = true;
                        parent[t] = Some((c, letter));
                        queue.push_back(t);
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s), "coset table not transitive");
        parent
    }

    /// Transversal words: representative of each coset, from the tree.
    pub fn transversal(&self) -> Vec<Word> {
        let parent = self.schreier_tree();
        let mut reps: Vec<Option<Word>> = vec![None; self.len()];
        reps[0] = Some(Word::identity());
        fn rep(c: usize, parent: &[Option<(usize, i32)>], reps: &mut Vec<Option<Word>>) -> Word {
            if let Some(w) = &reps[c] {
                return w.clone();
            }
            let (p, letter) = parent[c].expect("non-root coset has a parent");
            let w = rep(p, parent, reps).mul(&Word::reduce(&[letter]));
            reps[c] = Some(w.clone());
            w
        }
        (0..self.len()).map(|c| rep(c, &parent, &mut reps)).collect()
    }
}

/// Reidemeister-Schreier presentation of the finite-index subgroup whose
/// coset table is given (subgroup = stabilizer of coset 0).
///
/// Schreier generators are the non-tree (coset, letter) pairs; tree
/// generators are eliminated. Relators are the rewritten conjugates of each
/// relator of `pres` by each transversal element.
pub fn reidemeister_schreier(
    pres: &FinPresentation,
    cosets: &CosetTable,
) -> Result<FinPresentation, GroupError> {
    if cosets.rank != pres.alphabet.rank() {
        return Err(GroupError::AlphabetMismatch {
            expected: pres.alphabet.rank(),
            got: cosets.rank,
        });
    }
    let n = cosets.len();
    let rank = cosets.rank as usize;
    let parent = cosets.schreier_tree();

    // mark tree edges (coset, positive letter)
    let mut is_tree = vec![vec![false; rank]; n];
    for (c, p) in parent.iter().enumerate() {
        if let Some((pc, letter)) = p {
            if *letter > 0 {
                is_tree[*pc][(*letter - 1) as usize] = true;
            } else {
                is_tree[c][(-*letter - 1) as usize] = true;
            }
        }
    }
    // number the Schreier generators
    let mut gen_index = vec![vec![0u32; rank]; n];
    let mut next = 0u32;
    for c in 0..n {
        for l in 0..rank {
            if !is_tree[c][l] {
                next += 1;
                gen_index[c][l] = next;
            }
        }
    }
    // rewrite a word traced from a starting coset into Schreier generators
    let rewrite = |start: usize, w: &Word| -> Word {
        let mut out: Vec<i32> = Vec::new();
        let mut c = start;
        for &x in w.letters() {
            if x > 0 {
                let l = (x - 1) as usize;
                if !is_tree[c][l] {
                    out.push(gen_index[c][l] as i32);
                }
                c = cosets.act(c, x);
            } else {
                let v = cosets.act(c, x);
                let l = (-x - 1) as usize;
                if !is_tree[v][l] {
                    out.push(-(gen_index[v][l] as i32));
                }
                c = v;
            }
        }
        Word::reduce(&out)
    };
    let mut relators = Vec::new();
    for r in &pres.relators {
        for c in 0..n {
            let rw = rewrite(c, r);
            if !rw.is_identity() {
                relators.push(rw);
            }
        }
    }
    Ok(FinPresentation::new(Alphabet::new(next.max(1)), relators))
}
