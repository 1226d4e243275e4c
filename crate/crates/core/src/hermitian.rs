//! Slot operators attached to an almost complex structure, and the
//! associated decompositions of forms.
//!
//! For an orthogonal complex structure I on R^{2n} and an s-slot tensor b,
//! the single-slot operator substitutes I into one argument with a sign,
//!
//!   (I_(i) b)(X1, ..., Xs) = −b(X1, ..., I X_i, ..., Xs),
//!
//! the total operator substitutes into every slot at once,
//! I b = (−1)^s b(I·, ..., I·), the slot sum is i_I = I_(1) + ... + I_(s),
//! and the pair sum is L = Σ_{i<j} I_(i) I_(j).  On a cotangent-valued form
//! slot 1 is the covariant direction; the direction coupling operator is
//! I_(1)(I_(2) + ... + I_(s)), which pairs the direction against the form
//! slots and separates the torsion eigenspaces.
//!
//! The real forms underlying complex (p,0)-forms, written [[λ^{p,0}]], are
//! spanned by real and imaginary parts of wedges of the complexified frame
//! one-forms; projections onto that span and the associated splitting of
//! two-forms live here as well.

use nalgebra::DMatrix;

use crate::coform::CoForm;
use crate::error::{Error, Result};
use crate::form::{Form, Vector};

/// Slot operators built from an almost complex structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotOperatorKind {
    /// Substitute into one slot (0-based); valid when the result is again
    /// alternating.
    SingleSlot(usize),
    /// Substitute into every slot, (−1)^s b(I·, ..., I·).
    Total,
    /// Sum of all single-slot operators i_I.
    SlotSum,
    /// Sum over unordered slot pairs L = Σ_{i<j} I_(i) I_(j).
    PairSum,
    /// I_(1)(I_(2) + ... + I_(s)) on cotangent-valued forms: couples the
    /// covariant direction to the form slots.
    DirectionCoupling,
}

/// Verify that a matrix is an orthogonal almost complex structure.
pub fn check_complex_structure(i_mat: &DMatrix<f64>) -> Result<()> {
    let m = i_mat.nrows();
    if m != i_mat.ncols() || m % 2 != 0 {
        return Err(Error::Schema(format!(
            "complex structure must be square of even size, got {}x{}",
            i_mat.nrows(),
            i_mat.ncols()
        )));
    }
    let id = DMatrix::<f64>::identity(m, m);
    let orth = (i_mat.transpose() * i_mat - &id).norm();
    if orth > 1e-6 {
        return Err(Error::invariant("complex structure orthogonal", orth));
    }
    let square = (i_mat * i_mat + &id).norm();
    if square > 1e-6 {
        return Err(Error::invariant("complex structure squares to minus one", square));
    }
    Ok(())
}

/// Apply a slot operator to a plain form (slots 1..p are the form slots).
pub fn slot_apply(kind: SlotOperatorKind, b: &Form, i_mat: &DMatrix<f64>) -> Form {
    let p = b.degree();
    match kind {
        SlotOperatorKind::SingleSlot(i) => b.slot_single(i, i_mat),
        SlotOperatorKind::Total => {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            b.pullback(i_mat).scaled(sign)
        }
        SlotOperatorKind::SlotSum => b.lie_act(i_mat),
        SlotOperatorKind::PairSum => {
            // i_I^2 = Σ_i I_(i)^2 + 2 L = −p + 2L on p-forms
            let twice = b.lie_act(i_mat).lie_act(i_mat);
            let mut out = twice;
            out.add_scaled_assign(b, p as f64);
            out.scaled(0.5)
        }
        SlotOperatorKind::DirectionCoupling => {
            panic!("direction coupling acts on cotangent-valued forms")
        }
    }
}

/// Apply a slot operator to a cotangent-valued form; slot 1 is the
/// covariant direction, slots 2..p+1 the form slots.
pub fn slot_apply_coform(kind: SlotOperatorKind, b: &CoForm, i_mat: &DMatrix<f64>) -> CoForm {
    match kind {
        SlotOperatorKind::SingleSlot(0) => direction_single(b, i_mat),
        SlotOperatorKind::SingleSlot(i) => b.map(|c| c.slot_single(i - 1, i_mat)),
        SlotOperatorKind::Total => slot_apply_coform(
            SlotOperatorKind::SingleSlot(0),
            &b.map(|c| slot_apply(SlotOperatorKind::Total, c, i_mat)),
            i_mat,
        ),
        SlotOperatorKind::SlotSum => {
            let mut out = direction_single(b, i_mat);
            out += &b.map(|c| c.lie_act(i_mat));
            out
        }
        SlotOperatorKind::PairSum => {
            let s = (b.degree() + 1) as f64;
            let twice = slot_apply_coform(
                SlotOperatorKind::SlotSum,
                &slot_apply_coform(SlotOperatorKind::SlotSum, b, i_mat),
                i_mat,
            );
            let mut out = twice;
            out.add_scaled_assign(b, s);
            out.scaled(0.5)
        }
        SlotOperatorKind::DirectionCoupling => {
            direction_single(&b.map(|c| c.lie_act(i_mat)), i_mat)
        }
    }
}

/// I_(1) on the covariant direction: component a becomes −(value at I e_a).
fn direction_single(b: &CoForm, i_mat: &DMatrix<f64>) -> CoForm {
    b.precompose(i_mat).scaled(-1.0)
}

/// A unitary frame for I: real vectors u_1, ..., u_n such that
/// (u_1, ..., u_n, I u_1, ..., I u_n) is an orthonormal basis of R^{2n}.
///
/// Built by complex Gram-Schmidt over the ambient basis with pivoting.
pub fn unitary_frame(i_mat: &DMatrix<f64>) -> Result<Vec<Vector>> {
    check_complex_structure(i_mat)?;
    let m = i_mat.nrows();
    let n = m / 2;
    let mut frame: Vec<Vector> = Vec::with_capacity(n);
    let mut i_frame: Vec<Vector> = Vec::with_capacity(n);
    for _ in 0..n {
        // candidate with the largest residual after projecting out the
        // complex span of the frame so far
        let mut best: Option<(f64, Vector)> = None;
        for k in 0..m {
            let mut v = Vector::basis(m, k);
            for (u, iu) in frame.iter().zip(&i_frame) {
                let a = v.dot(u);
                let bcoef = v.dot(iu);
                v = v.sub(&u.scaled(a)).sub(&iu.scaled(bcoef));
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("dimension is positive");
        if norm < 1e-8 {
            return Err(Error::invariant("unitary frame construction", norm));
        }
        let u = v.scaled(1.0 / norm);
        let iu = u.apply(i_mat);
        frame.push(u);
        i_frame.push(iu);
    }
    Ok(frame)
}

/// Real and imaginary part of the wedge of complexified frame one-forms
/// u_{i1} + i I u_{i1}, ..., for one increasing index set.
pub(crate) fn complex_monomial(
    frame: &[Vector],
    i_mat: &DMatrix<f64>,
    indices: &[usize],
) -> (Form, Form) {
    let m = i_mat.nrows();
    let mut re = Form::scalar(m, 1.0);
    let mut im = Form::scalar(m, 0.0);
    for &k in indices {
        let u = frame[k].one_form();
        let iu = frame[k].apply(i_mat).one_form();
        // (re + i im) ∧ (u + i iu)
        let new_re = &re.wedge(&u) - &im.wedge(&iu);
        let new_im = &re.wedge(&iu) + &im.wedge(&u);
        re = new_re;
        im = new_im;
    }
    (re, im)
}

/// Basis of [[λ^{p,0}]] for the structure I: the real and imaginary parts
/// of all complex monomials of degree p in the given unitary frame.  Each
/// listed form has squared norm 2^{p−1} (for p >= 1), and distinct entries
/// are orthogonal.
pub fn lambda_basis(frame: &[Vector], i_mat: &DMatrix<f64>, p: usize) -> Vec<Form> {
    let m = i_mat.nrows();
    let n = m / 2;
    if p > n {
        return Vec::new();
    }
    if p == 0 {
        return vec![Form::scalar(m, 1.0)];
    }
    let mut out = Vec::new();
    let mut indices: Vec<usize> = (0..p).collect();
    loop {
        let (re, im) = complex_monomial(frame, i_mat, &indices);
        out.push(re);
        out.push(im);
        // advance the combination
        let mut k = p;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if indices[k] < n - (p - k) {
                indices[k] += 1;
                for j in k + 1..p {
                    indices[j] = indices[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Orthogonal projection of a p-form onto [[λ^{p,0}]].
pub fn lambda_project(a: &Form, i_mat: &DMatrix<f64>) -> Result<Form> {
    let frame = unitary_frame(i_mat)?;
    Ok(lambda_project_with_frame(a, &frame, i_mat))
}

/// Same as [`lambda_project`] with a precomputed unitary frame.
pub fn lambda_project_with_frame(a: &Form, frame: &[Vector], i_mat: &DMatrix<f64>) -> Form {
    let p = a.degree();
    let m = a.dim();
    if p == 0 || p == 1 {
        // scalars and one-forms already lie in the span
        return a.clone();
    }
    if p > m / 2 {
        return Form::zero(m, p);
    }
    let basis = lambda_basis(frame, i_mat, p);
    let norm_sq = 2f64.powi(p as i32 - 1);
    let mut out = Form::zero(m, p);
    for b in &basis {
        out.add_scaled_assign(b, a.inner(b) / norm_sq);
    }
    out
}

/// Split of a two-form along R·ω ⊕ su(n) ⊕ u(n)⊥: the ω-trace multiple,
/// the trace-free I-invariant part, and the I-anti-invariant part.
pub struct TwoFormSplit {
    pub omega_multiple: f64,
    pub su_part: Form,
    pub anti_invariant: Form,
}

pub fn two_form_split(a: &Form, i_mat: &DMatrix<f64>, omega: &Form) -> Result<TwoFormSplit> {
    if a.degree() != 2 {
        return Err(Error::Schema(format!("two-form split got degree {}", a.degree())));
    }
    let frame = unitary_frame(i_mat)?;
    let anti = lambda_project_with_frame(a, &frame, i_mat);
    let omega_multiple = a.inner(omega) / omega.inner(omega);
    let mut su = a.clone();
    su.add_scaled_assign(omega, -omega_multiple);
    su -= &anti;
    Ok(TwoFormSplit { omega_multiple, su_part: su, anti_invariant: anti })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;

    fn standard_i(n: usize) -> DMatrix<f64> {
        let m = 2 * n;
        let mut i_mat = DMatrix::<f64>::zeros(m, m);
        for k in 0..n {
            i_mat[(n + k, k)] = 1.0;
            i_mat[(k, n + k)] = -1.0;
        }
        i_mat
    }

    fn random_form(g: &mut XorShift64Star, m: usize, p: usize) -> Form {
        let mut f = Form::zero(m, p);
        for c in f.coeffs_mut() {
            *c = g.uniform();
        }
        f
    }

    #[test]
    fn single_slot_squares_to_minus_one() {
        let n = 3;
        let i_mat = standard_i(n);
        let mut g = XorShift64Star::new(2);
        let b = random_form(&mut g, 2 * n, 1);
        // on one-forms there is a single slot and the result is alternating
        let twice = b.slot_single(0, &i_mat).slot_single(0, &i_mat);
        assert!(twice.residual_to(&b.scaled(-1.0)) < 1e-12);
    }

    #[test]
    fn slot_operators_commute_via_eval() {
        // I_(i) I_(j) = I_(j) I_(i) checked by multilinear evaluation on a
        // random three-form
        let n = 3;
        let m = 2 * n;
        let i_mat = standard_i(n);
        let mut g = XorShift64Star::new(9);
        let b = random_form(&mut g, m, 3);
        for trial in 0..10 {
            let xs: Vec<Vector> = (0..3)
                .map(|k| {
                    let mut v = Vector::zeros(m);
                    for c in &mut v.coords {
                        *c = g.uniform();
                    }
                    let _ = (trial, k);
                    v
                })
                .collect();
            // I_(1) I_(2) b (x,y,z) = b(Ix, Iy, z), independent of order
            let sub = |a: usize, bslot: usize| {
                let mut args = xs.clone();
                args[a] = args[a].apply(&i_mat);
                args[bslot] = args[bslot].apply(&i_mat);
                b.eval(&args)
            };
            assert!((sub(0, 1) - sub(1, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_sum_on_anti_invariant_forms() {
        // L = −binomial(p, 2) on [[λ^{p,0}]]
        let n = 3;
        let i_mat = standard_i(n);
        let frame = unitary_frame(&i_mat).unwrap();
        for p in 2..=3 {
            for b in lambda_basis(&frame, &i_mat, p) {
                let l = slot_apply(SlotOperatorKind::PairSum, &b, &i_mat);
                let expect = b.scaled(-(crate::form::binomial(p, 2) as f64));
                assert!(l.residual_to(&expect) < 1e-12, "p = {p}");
            }
        }
    }

    #[test]
    fn lambda_projection_is_idempotent_and_orthogonal() {
        let n = 3;
        let m = 2 * n;
        let i_mat = standard_i(n);
        let mut g = XorShift64Star::new(4);
        let a = random_form(&mut g, m, 2);
        let proj = lambda_project(&a, &i_mat).unwrap();
        let twice = lambda_project(&proj, &i_mat).unwrap();
        assert!(twice.residual_to(&proj) < 1e-12);
        // residual is orthogonal to the image
        let resid = &a - &proj;
        let frame = unitary_frame(&i_mat).unwrap();
        for b in lambda_basis(&frame, &i_mat, 2) {
            assert!(resid.inner(&b).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_dimension_two_forms() {
        // dim [[λ^{2,0}]] = n(n−1) as a real space
        for n in 2..=4 {
            let i_mat = standard_i(n);
            let frame = unitary_frame(&i_mat).unwrap();
            let basis = lambda_basis(&frame, &i_mat, 2);
            assert_eq!(basis.len(), n * (n - 1));
        }
    }

    #[test]
    fn unitary_frame_of_rotated_structure() {
        // conjugate the standard structure by a random rotation and check
        // the frame produced is unitary for it
        let n = 2;
        let m = 2 * n;
        let mut g = XorShift64Star::new(13);
        let raw = DMatrix::from_fn(m, m, |_, _| g.uniform());
        let qr = raw.qr();
        let q = qr.q();
        let i_mat = &q * standard_i(n) * q.transpose();
        let frame = unitary_frame(&i_mat).unwrap();
        assert_eq!(frame.len(), n);
        for (a, u) in frame.iter().enumerate() {
            let iu = u.apply(&i_mat);
            assert!((u.norm() - 1.0).abs() < 1e-10);
            assert!(u.dot(&iu).abs() < 1e-10);
            for v in frame.iter().skip(a + 1) {
                assert!(u.dot(v).abs() < 1e-10);
                assert!(iu.dot(v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lambda_example_dim_two() {
        // n = 2: projection of e1 ∧ e2 is (e1 ∧ e2 − Ie1 ∧ Ie2) / 2
        let n = 2;
        let m = 4;
        let i_mat = standard_i(n);
        let a = Form::basis_form(m, &[0, 1]);
        let proj = lambda_project(&a, &i_mat).unwrap();
        let mut expect = Form::zero(m, 2);
        expect.set_coeff(&[0, 1], 0.5);
        expect.set_coeff(&[2, 3], -0.5);
        assert!(proj.residual_to(&expect) < 1e-12);
    }

    #[test]
    fn anti_invariant_under_total_operator() {
        // b in [[λ^{2,0}]] satisfies I b = −b; the su part is I-invariant
        let n = 3;
        let m = 2 * n;
        let i_mat = standard_i(n);
        let mut omega = Form::zero(m, 2);
        for k in 0..n {
            omega.set_coeff(&[n + k, k], 1.0);
        }
        let mut g = XorShift64Star::new(6);
        let a = random_form(&mut g, m, 2);
        let split = two_form_split(&a, &i_mat, &omega).unwrap();
        let total_anti = slot_apply(SlotOperatorKind::Total, &split.anti_invariant, &i_mat);
        assert!(total_anti.residual_to(&split.anti_invariant.scaled(-1.0)) < 1e-12);
        let total_su = slot_apply(SlotOperatorKind::Total, &split.su_part, &i_mat);
        assert!(total_su.residual_to(&split.su_part) < 1e-12);
        assert!(split.su_part.inner(&omega).abs() < 1e-12);
        // parts reassemble
        let mut sum = split.su_part.clone();
        sum.add_scaled_assign(&omega, split.omega_multiple);
        sum += &split.anti_invariant;
        assert!(sum.residual_to(&a) < 1e-12);
    }
}
