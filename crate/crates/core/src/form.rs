//! Dense exterior algebra over R^m in a fixed orthonormal frame.
//!
//! A p-form is stored as a dense coefficient vector over the strictly
//! increasing multi-indices of length p, ordered lexicographically.  The
//! coefficient at (i1 < ... < ip) is the value of the form on the frame
//! vectors (e_{i1}, ..., e_{ip}).  Dimensions up to [`MAX_DIM`] are
//! supported, so a coefficient vector never exceeds binomial(12, 6) = 924
//! entries and multi-indices fit in a u16 bitmask.
//!
//! Conventions, fixed once for the whole crate:
//! * wedge follows the determinant convention: (e1 ∧ e2)(e1, e2) = 1;
//! * the interior product feeds the vector into the first slot:
//!   (x ⌟ a)(y, ...) = a(x, y, ...);
//! * the Hodge star is taken against the volume form of the frame in its
//!   given order, a ∧ ∗b = ⟨a, b⟩ vol;
//! * the inner product of two p-forms is the sum of products of their
//!   coefficients over increasing multi-indices.

use nalgebra::DMatrix;
use once_cell::sync::Lazy;

/// Largest supported frame dimension.
pub const MAX_DIM: usize = 12;

pub fn binomial(m: usize, p: usize) -> usize {
    if p > m {
        return 0;
    }
    let p = p.min(m - p);
    let mut num = 1usize;
    let mut den = 1usize;
    for k in 0..p {
        num *= m - k;
        den *= k + 1;
    }
    num / den
}

struct DimTables {
    /// masks[p][r] = bitmask of the r-th increasing p-tuple in lexicographic order.
    masks: Vec<Vec<u16>>,
    /// rank[mask] = position of `mask` within its cardinality class.
    rank: Vec<u32>,
}

fn build_tables(m: usize) -> DimTables {
    let mut masks: Vec<Vec<u16>> = Vec::with_capacity(m + 1);
    let mut rank = vec![0u32; 1usize << m];
    for p in 0..=m {
        let mut list = Vec::with_capacity(binomial(m, p));
        gen_combinations(m, p, 0, 0, &mut list);
        for (r, &mask) in list.iter().enumerate() {
            rank[mask as usize] = r as u32;
        }
        masks.push(list);
    }
    DimTables { masks, rank }
}

fn gen_combinations(m: usize, remaining: usize, start: usize, mask: u16, out: &mut Vec<u16>) {
    if remaining == 0 {
        out.push(mask);
        return;
    }
    for i in start..=(m - remaining) {
        gen_combinations(m, remaining - 1, i + 1, mask | (1u16 << i), out);
    }
}

static TABLES: Lazy<Vec<DimTables>> = Lazy::new(|| (0..=MAX_DIM).map(build_tables).collect());

fn tables(m: usize) -> &'static DimTables {
    assert!(m <= MAX_DIM, "frame dimension {m} exceeds MAX_DIM = {MAX_DIM}");
    &TABLES[m]
}

/// Bitmasks of all increasing p-tuples in dimension m, in storage order.
pub fn basis_masks(m: usize, p: usize) -> &'static [u16] {
    &tables(m).masks[p]
}

/// Frame positions (ascending) encoded by a bitmask.
pub fn mask_indices(mask: u16) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut bits = mask;
    while bits != 0 {
        out.push(bits.trailing_zeros() as usize);
        bits &= bits - 1;
    }
    out
}

/// Storage rank of a set of frame positions, with the sign of the
/// permutation sorting them.  None if an index repeats.
pub fn rank_of_indices(m: usize, indices: &[usize]) -> Option<(usize, f64)> {
    let mut mask = 0u16;
    for &i in indices {
        assert!(i < m, "frame index {i} out of range for dimension {m}");
        if mask & (1u16 << i) != 0 {
            return None;
        }
        mask |= 1u16 << i;
    }
    let mut inversions = 0usize;
    for (k, &a) in indices.iter().enumerate() {
        for &b in &indices[k + 1..] {
            if b < a {
                inversions += 1;
            }
        }
    }
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    Some((tables(m).rank[mask as usize] as usize, sign))
}

/// Parity (as a sign) of merging two disjoint sorted index sets a, b into
/// one sorted set with a's elements first.
fn merge_sign(a: u16, b: u16) -> f64 {
    let mut swaps = 0u32;
    let mut bits = a;
    while bits != 0 {
        let x = bits.trailing_zeros();
        swaps += (b & ((1u16 << x) - 1)).count_ones();
        bits &= bits - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Vector in R^m expressed in the fixed orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    pub coords: Vec<f64>,
}

impl Vector {
    pub fn zeros(m: usize) -> Self {
        Vector { coords: vec![0.0; m] }
    }

    pub fn basis(m: usize, i: usize) -> Self {
        assert!(i < m);
        let mut v = Self::zeros(m);
        v.coords[i] = 1.0;
        v
    }

    pub fn from_coords(coords: Vec<f64>) -> Self {
        Vector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector { coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim());
        Vector { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.add(&other.scaled(-1.0))
    }

    /// Matrix application `mat * self`.
    pub fn apply(&self, mat: &DMatrix<f64>) -> Vector {
        assert_eq!(mat.ncols(), self.dim());
        let mut out = Vector::zeros(mat.nrows());
        for (j, &xj) in self.coords.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for i in 0..mat.nrows() {
                out.coords[i] += mat[(i, j)] * xj;
            }
        }
        out
    }

    /// The one-form with the same coefficients (metric identification in
    /// the orthonormal frame).
    pub fn one_form(&self) -> Form {
        let m = self.dim();
        let mut f = Form::zero(m, 1);
        f.coeffs.copy_from_slice(&self.coords);
        f
    }

    pub fn residual_to(&self, other: &Vector) -> f64 {
        let diff = self.sub(other).norm();
        diff / 1f64.max(self.norm()).max(other.norm())
    }
}

/// Alternating p-form with dense coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    m: usize,
    p: usize,
    coeffs: Vec<f64>,
}

impl Form {
    pub fn zero(m: usize, p: usize) -> Self {
        assert!(p <= m, "degree {p} exceeds dimension {m}");
        Form { m, p, coeffs: vec![0.0; binomial(m, p)] }
    }

    pub fn scalar(m: usize, value: f64) -> Self {
        let mut f = Form::zero(m, 0);
        f.coeffs[0] = value;
        f
    }

    /// Volume form of the frame in its given order.
    pub fn volume(m: usize) -> Self {
        let mut f = Form::zero(m, m);
        f.coeffs[0] = 1.0;
        f
    }

    /// Wedge of frame one-forms at the given (0-based, distinct) positions.
    pub fn basis_form(m: usize, indices: &[usize]) -> Self {
        let (rank, sign) = rank_of_indices(m, indices).expect("repeated frame index");
        let mut f = Form::zero(m, indices.len());
        f.coeffs[rank] = sign;
        f
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Value on the frame tuple given by 0-based indices (any order).
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.p);
        match rank_of_indices(self.m, indices) {
            None => 0.0,
            Some((rank, sign)) => sign * self.coeffs[rank],
        }
    }

    pub fn set_coeff(&mut self, indices: &[usize], value: f64) {
        assert_eq!(indices.len(), self.p);
        let (rank, sign) = rank_of_indices(self.m, indices).expect("repeated frame index");
        self.coeffs[rank] = sign * value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()))
    }

    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.m, other.m, "wedge of forms over different frames");
        let t = tables(self.m);
        let mut out = Form::zero(self.m, self.p + other.p);
        for (ra, &ma) in t.masks[self.p].iter().enumerate() {
            let ca = self.coeffs[ra];
            if ca == 0.0 {
                continue;
            }
            for (rb, &mb) in t.masks[other.p].iter().enumerate() {
                let cb = other.coeffs[rb];
                if cb == 0.0 || ma & mb != 0 {
                    continue;
                }
                out.coeffs[t.rank[(ma | mb) as usize] as usize] += merge_sign(ma, mb) * ca * cb;
            }
        }
        out
    }

    /// Interior product x ⌟ a, feeding x into the first slot.
    pub fn interior(&self, x: &Vector) -> Form {
        assert!(self.p >= 1, "interior product needs degree >= 1");
        assert_eq!(x.dim(), self.m);
        let t = tables(self.m);
        let mut out = Form::zero(self.m, self.p - 1);
        for (rs, &ms) in t.masks[self.p].iter().enumerate() {
            let cs = self.coeffs[rs];
            if cs == 0.0 {
                continue;
            }
            let mut bits = ms;
            let mut position = 0u32;
            while bits != 0 {
                let c = bits.trailing_zeros() as usize;
                let xc = x.coords[c];
                if xc != 0.0 {
                    let tm = ms & !(1u16 << c);
                    let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
                    out.coeffs[t.rank[tm as usize] as usize] += sign * xc * cs;
                }
                position += 1;
                bits &= bits - 1;
            }
        }
        out
    }

    /// Contraction with the bivector x ∧ y: ((x ∧ y) ⌟ a)(...) = a(x, y, ...).
    pub fn interior_bivector(&self, x: &Vector, y: &Vector) -> Form {
        assert!(self.p >= 2, "bivector contraction needs degree >= 2");
        self.interior(x).interior(y)
    }

    /// Hodge star against the standard frame volume.
    pub fn hodge(&self) -> Form {
        let t = tables(self.m);
        let full: u16 = ((1u32 << self.m) - 1) as u16;
        let mut out = Form::zero(self.m, self.m - self.p);
        for (rs, &ms) in t.masks[self.p].iter().enumerate() {
            let c = self.coeffs[rs];
            if c == 0.0 {
                continue;
            }
            let comp = full & !ms;
            out.coeffs[t.rank[comp as usize] as usize] = merge_sign(ms, comp) * c;
        }
        out
    }

    /// Hodge star against an explicit volume form, which must be the frame
    /// volume up to sign.
    pub fn hodge_with(&self, vol: &Form) -> Form {
        assert_eq!(vol.dim(), self.m);
        assert_eq!(vol.degree(), self.m, "volume input must have top degree");
        let c = vol.coeffs[0];
        assert!(
            (c.abs() - 1.0).abs() < 1e-9,
            "volume input is not a unit volume (coefficient {c})"
        );
        let mut out = self.hodge();
        if c < 0.0 {
            out.scale_assign(-1.0);
        }
        out
    }

    pub fn inner(&self, other: &Form) -> f64 {
        assert_eq!(self.m, other.m);
        assert_eq!(self.p, other.p, "inner product of forms of different degree");
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Evaluate on a tuple of vectors, one per slot.
    pub fn eval(&self, args: &[Vector]) -> f64 {
        assert_eq!(args.len(), self.p, "evaluation needs one vector per slot");
        let mut f = self.clone();
        for x in args {
            f = f.interior(x);
        }
        f.coeffs[0]
    }

    /// Substitution of `mat` into every slot: (b ∘ A)(x1, ..., xp) = b(A x1, ..., A xp).
    pub fn pullback(&self, mat: &DMatrix<f64>) -> Form {
        assert_eq!(mat.nrows(), self.m);
        assert_eq!(mat.ncols(), self.m);
        if let Some(perm) = signed_permutation(mat) {
            return self.pullback_signed_permutation(&perm);
        }
        let t = tables(self.m);
        let mut out = Form::zero(self.m, self.p);
        let mut minor = vec![0.0f64; self.p * self.p];
        for (rt, &mt) in t.masks[self.p].iter().enumerate() {
            let cols = mask_indices(mt);
            let mut acc = 0.0;
            for (rs, &ms) in t.masks[self.p].iter().enumerate() {
                let cs = self.coeffs[rs];
                if cs == 0.0 {
                    continue;
                }
                let rows = mask_indices(ms);
                for (i, &r) in rows.iter().enumerate() {
                    for (j, &cidx) in cols.iter().enumerate() {
                        minor[i * self.p + j] = mat[(r, cidx)];
                    }
                }
                acc += cs * det_in_place(&mut minor, self.p);
            }
            out.coeffs[rt] = acc;
        }
        out
    }

    fn pullback_signed_permutation(&self, perm: &[(usize, f64)]) -> Form {
        // perm[j] = (sigma(j), tau_j) with A e_j = tau_j e_{sigma(j)}
        let t = tables(self.m);
        let mut inverse = vec![0usize; self.m];
        for (j, &(sj, _)) in perm.iter().enumerate() {
            inverse[sj] = j;
        }
        let mut out = Form::zero(self.m, self.p);
        for (rs, &ms) in t.masks[self.p].iter().enumerate() {
            let cs = self.coeffs[rs];
            if cs == 0.0 {
                continue;
            }
            // target tuple T = sigma^{-1}(S)
            let mut target: Vec<usize> = mask_indices(ms).iter().map(|&s| inverse[s]).collect();
            target.sort_unstable();
            let mut tau = 1.0;
            let mut tm = 0u16;
            for &tj in &target {
                tau *= perm[tj].1;
                tm |= 1u16 << tj;
            }
            // sign of sorting the image sequence (sigma(t) for t in sorted T)
            let images: Vec<usize> = target.iter().map(|&tj| perm[tj].0).collect();
            let mut inversions = 0usize;
            for i in 0..images.len() {
                for j in i + 1..images.len() {
                    if images[j] < images[i] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            out.coeffs[t.rank[tm as usize] as usize] += sign * tau * cs;
        }
        out
    }

    /// Derivative action of an endomorphism on form slots:
    /// (A · b)(x1, ..., xp) = −Σ_k b(x1, ..., A x_k, ..., xp).
    pub fn lie_act(&self, mat: &DMatrix<f64>) -> Form {
        assert_eq!(mat.nrows(), self.m);
        assert_eq!(mat.ncols(), self.m);
        let t = tables(self.m);
        let mut out = Form::zero(self.m, self.p);
        for (rs, &ms) in t.masks[self.p].iter().enumerate() {
            let cs = self.coeffs[rs];
            if cs == 0.0 {
                continue;
            }
            self.substitute_into(&mut out, t, ms, cs, mat, None);
        }
        out
    }

    /// Single-slot substitution with the sign convention
    /// (A_(i) b)(x1, ..., xp) = −b(x1, ..., A x_i, ..., xp), for the 0-based
    /// slot i.  The result is read off on increasing frame tuples, so it is
    /// the alternating representative; it equals the substituted tensor
    /// exactly when that tensor is alternating (the only situations where
    /// the operator is applied here).
    pub fn slot_single(&self, slot: usize, mat: &DMatrix<f64>) -> Form {
        assert!(slot < self.p, "slot {slot} out of range for degree {}", self.p);
        assert_eq!(mat.nrows(), self.m);
        let t = tables(self.m);
        let mut out = Form::zero(self.m, self.p);
        for (rs, &ms) in t.masks[self.p].iter().enumerate() {
            let cs = self.coeffs[rs];
            if cs == 0.0 {
                continue;
            }
            self.substitute_into(&mut out, t, ms, cs, mat, Some(slot));
        }
        out
    }

    /// Accumulate −Σ_k cs · b-substitution at slot k (all slots, or only
    /// `only_slot`), for the source tuple `ms`.
    fn substitute_into(
        &self,
        out: &mut Form,
        t: &DimTables,
        ms: u16,
        cs: f64,
        mat: &DMatrix<f64>,
        only_slot: Option<usize>,
    ) {
        let mut bits = ms;
        let mut k = 0usize;
        while bits != 0 {
            let s_k = bits.trailing_zeros() as usize;
            for c in 0..self.m {
                // source element s_k is consumed, target element c appears:
                // the weight is the (s_k, c) entry of the substituted matrix.
                // The argument slot affected is the position of c in the
                // target tuple, which is k when c = s_k and `below` otherwise.
                let a = mat[(s_k, c)];
                if a == 0.0 {
                    continue;
                }
                if c == s_k {
                    if only_slot.is_none() || only_slot == Some(k) {
                        out.coeffs[t.rank[ms as usize] as usize] -= a * cs;
                    }
                } else if ms & (1u16 << c) == 0 {
                    let without = ms & !(1u16 << s_k);
                    let tm = without | (1u16 << c);
                    let below = (without & ((1u16 << c) - 1)).count_ones() as usize;
                    if only_slot.is_none() || only_slot == Some(below) {
                        let sign = if (below + k) % 2 == 0 { 1.0 } else { -1.0 };
                        out.coeffs[t.rank[tm as usize] as usize] -= sign * a * cs;
                    }
                }
            }
            k += 1;
            bits &= bits - 1;
        }
    }

    pub fn scaled(&self, s: f64) -> Form {
        let mut out = self.clone();
        out.scale_assign(s);
        out
    }

    pub fn scale_assign(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn add_scaled_assign(&mut self, other: &Form, s: f64) {
        assert_eq!(self.m, other.m);
        assert_eq!(self.p, other.p);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// Difference norm relative to max(1, ‖self‖, ‖other‖).
    pub fn residual_to(&self, other: &Form) -> f64 {
        assert_eq!(self.m, other.m);
        assert_eq!(self.p, other.p);
        let mut diff = 0.0f64;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            diff += (a - b) * (a - b);
        }
        diff.sqrt() / 1f64.max(self.norm()).max(other.norm())
    }

    /// Two-form with value ⟨x, B y⟩ for a skew matrix B.
    pub fn from_skew_matrix(mat: &DMatrix<f64>) -> Form {
        let m = mat.nrows();
        assert_eq!(mat.ncols(), m);
        let mut out = Form::zero(m, 2);
        for a in 0..m {
            for b in (a + 1)..m {
                let v = mat[(a, b)];
                if v != 0.0 {
                    out.set_coeff(&[a, b], v);
                }
            }
        }
        out
    }

    /// Matrix B with ⟨x, B y⟩ equal to the two-form; degree must be 2.
    pub fn to_skew_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.p, 2, "only two-forms convert to skew matrices");
        let mut out = DMatrix::zeros(self.m, self.m);
        for a in 0..self.m {
            for b in (a + 1)..self.m {
                let v = self.coeff(&[a, b]);
                out[(a, b)] = v;
                out[(b, a)] = -v;
            }
        }
        out
    }

    /// The vector with the same coefficients; degree must be 1.
    pub fn to_vector(&self) -> Vector {
        assert_eq!(self.p, 1, "only one-forms convert to vectors");
        Vector { coords: self.coeffs.clone() }
    }
}

/// Columns of a signed permutation matrix as (row, sign) pairs, if `mat`
/// is one.
fn signed_permutation(mat: &DMatrix<f64>) -> Option<Vec<(usize, f64)>> {
    let m = mat.ncols();
    let mut seen = vec![false; m];
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut hit = None;
        for i in 0..m {
            let v = mat[(i, j)];
            if v == 0.0 {
                continue;
            }
            if v.abs() != 1.0 || hit.is_some() {
                return None;
            }
            hit = Some((i, v));
        }
        let (i, v) = hit?;
        if seen[i] {
            return None;
        }
        seen[i] = true;
        out.push((i, v));
    }
    Some(out)
}

/// Determinant by Gaussian elimination with partial pivoting; overwrites
/// the buffer.
fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0f64;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        let pv = a[pivot * n + col];
        if pv == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        for row in col + 1..n {
            let factor = a[row * n + col] / pv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
        }
    }
    det
}

impl std::ops::Add for &Form {
    type Output = Form;
    fn add(self, other: &Form) -> Form {
        let mut out = self.clone();
        out.add_scaled_assign(other, 1.0);
        out
    }
}

impl std::ops::Sub for &Form {
    type Output = Form;
    fn sub(self, other: &Form) -> Form {
        let mut out = self.clone();
        out.add_scaled_assign(other, -1.0);
        out
    }
}

impl std::ops::Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scaled(-1.0)
    }
}

impl std::ops::Mul<f64> for &Form {
    type Output = Form;
    fn mul(self, s: f64) -> Form {
        self.scaled(s)
    }
}

impl std::ops::AddAssign<&Form> for Form {
    fn add_assign(&mut self, other: &Form) {
        self.add_scaled_assign(other, 1.0);
    }
}

impl std::ops::SubAssign<&Form> for Form {
    fn sub_assign(&mut self, other: &Form) {
        self.add_scaled_assign(other, -1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn lexicographic_order() {
        // dimension 4, degree 2: (12), (13), (14), (23), (24), (34)
        let masks = basis_masks(4, 2);
        let expect: Vec<u16> = vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100];
        assert_eq!(masks, &expect[..]);
    }

    #[test]
    fn wedge_determinant_convention() {
        let e1 = Form::basis_form(4, &[0]);
        let e2 = Form::basis_form(4, &[1]);
        let w = e1.wedge(&e2);
        assert_eq!(w.coeff(&[0, 1]), 1.0);
        assert_eq!(w.coeff(&[1, 0]), -1.0);
    }

    #[test]
    fn basis_form_sign() {
        let f = Form::basis_form(4, &[1, 0]);
        assert_eq!(f.coeff(&[0, 1]), -1.0);
    }

    #[test]
    fn interior_first_slot() {
        // (x ⌟ (e1 ∧ e2))(y) = (e1 ∧ e2)(x, y)
        let a = Form::basis_form(4, &[0, 1]);
        let x = Vector::basis(4, 1);
        let r = a.interior(&x);
        assert_eq!(r.coeff(&[0]), -1.0);
        assert_eq!(r.coeff(&[1]), 0.0);
    }

    #[test]
    fn hodge_of_e12_in_dim4() {
        let a = Form::basis_form(4, &[0, 1]);
        let h = a.hodge();
        assert_eq!(h.coeff(&[2, 3]), 1.0);
        // a ∧ ∗a = ⟨a, a⟩ vol
        let top = a.wedge(&h);
        assert_eq!(top.coeff(&[0, 1, 2, 3]), 1.0);
    }

    #[test]
    fn eval_matches_coeff() {
        let a = Form::basis_form(5, &[0, 2, 3]);
        let args = [Vector::basis(5, 0), Vector::basis(5, 3), Vector::basis(5, 2)];
        assert_eq!(a.eval(&args), -1.0);
    }

    #[test]
    fn pullback_identity() {
        let a = Form::basis_form(4, &[0, 2]);
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(a.pullback(&id), a);
    }

    #[test]
    fn pullback_general_matches_eval() {
        let mut g = crate::rng::XorShift64Star::new(3);
        let m = 4;
        let mat = DMatrix::from_fn(m, m, |_, _| g.uniform());
        let mut a = Form::zero(m, 2);
        for c in a.coeffs_mut() {
            *c = g.uniform();
        }
        let pb = a.pullback(&mat);
        for &(i, j) in &[(0usize, 1usize), (0, 2), (1, 3), (2, 3)] {
            let cols: Vec<Vector> =
                [i, j].iter().map(|&k| Vector::basis(m, k).apply(&mat)).collect();
            let direct = a.eval(&cols);
            assert!((pb.coeff(&[i, j]) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn lie_act_is_slot_sum() {
        let mut g = crate::rng::XorShift64Star::new(11);
        let m = 6;
        let mat = DMatrix::from_fn(m, m, |_, _| g.uniform());
        let mut a = Form::zero(m, 3);
        for c in a.coeffs_mut() {
            *c = g.uniform();
        }
        let total = a.lie_act(&mat);
        let mut by_slots = Form::zero(m, 3);
        for slot in 0..3 {
            by_slots += &a.slot_single(slot, &mat);
        }
        assert!(total.residual_to(&by_slots) < 1e-12);
    }

    #[test]
    fn lie_act_matches_direct_evaluation() {
        // (A · b)(x, y) = −b(Ax, y) − b(x, Ay) for alternating results:
        // check against substituted evaluation on frame pairs.
        let mut g = crate::rng::XorShift64Star::new(17);
        let m = 5;
        // skew matrix keeps the result alternating for any slot count
        let raw = DMatrix::from_fn(m, m, |_, _| g.uniform());
        let mat = (&raw - &raw.transpose()).scale(0.5);
        let mut a = Form::zero(m, 2);
        for c in a.coeffs_mut() {
            *c = g.uniform();
        }
        let acted = a.lie_act(&mat);
        for i in 0..m {
            for j in (i + 1)..m {
                let ei = Vector::basis(m, i);
                let ej = Vector::basis(m, j);
                let direct = -a.eval(&[ei.apply(&mat), ej.clone()]) - a.eval(&[ei, ej.apply(&mat)]);
                assert!((acted.coeff(&[i, j]) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slot_single_matches_direct_evaluation() {
        // coefficients of the slot substitution read the substituted tensor
        // on increasing frame tuples, for a generic (non-structured) matrix
        let mut g = crate::rng::XorShift64Star::new(23);
        let m = 5;
        let mat = DMatrix::from_fn(m, m, |_, _| g.uniform());
        let mut a = Form::zero(m, 3);
        for c in a.coeffs_mut() {
            *c = g.uniform();
        }
        for slot in 0..3 {
            let acted = a.slot_single(slot, &mat);
            for i in 0..m {
                for j in (i + 1)..m {
                    for k in (j + 1)..m {
                        let mut args =
                            vec![Vector::basis(m, i), Vector::basis(m, j), Vector::basis(m, k)];
                        args[slot] = args[slot].apply(&mat);
                        let direct = -a.eval(&args);
                        assert!((acted.coeff(&[i, j, k]) - direct).abs() < 1e-12, "slot {slot}");
                    }
                }
            }
        }
    }
}
