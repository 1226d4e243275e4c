//! Pointwise special unitary structures on R^{2n}.
//!
//! An [`SUStructure`] bundles an orthogonal complex structure I with its
//! fundamental two-form ω, a unit complex volume form Ψ = ψ₊ + iψ₋, the
//! real volume form, and an adapted orthonormal basis u_1, ..., u_n,
//! Iu_1, ..., Iu_n on which ψ₊ evaluates to one.  [`standard_structure`]
//! builds the flat model, [`SUStructure::adapt`] reconstructs the adapted
//! data from an arbitrary valid triple (I, ψ₊, ψ₋), and
//! [`SUStructure::validate`] reports the residual of every defining
//! identity, including the star and wedge relations the rest of the crate
//! leans on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::form::{Form, Vector};
use crate::hermitian::{
    check_complex_structure, complex_monomial, lambda_project_with_frame, slot_apply, unitary_frame,
    SlotOperatorKind,
};
use crate::rng::XorShift64Star;

/// Largest supported complex dimension (real dimension 2n ≤ 12).
pub const MAX_COMPLEX_DIM: usize = 6;

/// Result of one named validation check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
}

/// A pointwise SU(n)-structure: metric-compatible complex structure,
/// fundamental two-form, complex volume form, real volume form and an
/// adapted basis.
#[derive(Debug, Clone)]
pub struct SUStructure {
    n: usize,
    i_mat: DMatrix<f64>,
    omega: Form,
    psi_plus: Form,
    psi_minus: Form,
    vol: Form,
    basis: Vec<Vector>,
}

/// First-order data of a conformal rescaling of the metric, evaluated at a
/// point where the scaling function vanishes: only its differential enters.
#[derive(Debug, Clone)]
pub struct ConformalChange {
    pub df: Vector,
}

/// The fundamental two-form of I: ω(x, y) = ⟨x, Iy⟩.
pub fn omega_from_i(i_mat: &DMatrix<f64>) -> Form {
    let m = i_mat.nrows();
    let mut omega = Form::zero(m, 2);
    for a in 0..m {
        for b in (a + 1)..m {
            let v = i_mat[(a, b)];
            if v != 0.0 {
                omega.set_coeff(&[a, b], v);
            }
        }
    }
    omega
}

/// The flat model on R^{2n}: I e_k = e_{n+k}, ω = Σ Ie_k ∧ e_k,
/// Ψ = (e_1 + iIe_1) ∧ ... ∧ (e_n + iIe_n), vol = e_1 ∧ ... ∧ e_{2n}.
pub fn standard_structure(n: usize) -> Result<SUStructure> {
    if !(1..=MAX_COMPLEX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension {
            n,
            reason: format!("complex dimension must lie in 1..={MAX_COMPLEX_DIM}"),
        });
    }
    let m = 2 * n;
    let mut i_mat = DMatrix::zeros(m, m);
    for k in 0..n {
        i_mat[(n + k, k)] = 1.0;
        i_mat[(k, n + k)] = -1.0;
    }
    let frame: Vec<Vector> = (0..n).map(|k| Vector::basis(m, k)).collect();
    let indices: Vec<usize> = (0..n).collect();
    let (psi_plus, psi_minus) = complex_monomial(&frame, &i_mat, &indices);
    let omega = omega_from_i(&i_mat);
    let basis: Vec<Vector> = (0..m).map(|k| Vector::basis(m, k)).collect();
    Ok(SUStructure { n, i_mat, omega, psi_plus, psi_minus, vol: Form::volume(m), basis })
}

impl SUStructure {
    /// Rebuild the adapted data from a valid triple (I, ψ₊, ψ₋): run
    /// complex Gram-Schmidt to get a unitary frame, rotate its first vector
    /// by the phase of Ψ on the frame so that Ψ evaluates to one, and
    /// re-derive ω and the volume form.  Inputs violating the structure
    /// identities beyond 1e-6 are rejected with the failed check named.
    pub fn adapt(i_mat: &DMatrix<f64>, psi_plus: &Form, psi_minus: &Form) -> Result<SUStructure> {
        const TOL: f64 = 1e-6;
        check_complex_structure(i_mat)?;
        let m = i_mat.nrows();
        let n = m / 2;
        if !(1..=MAX_COMPLEX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension {
                n,
                reason: format!("complex dimension must lie in 1..={MAX_COMPLEX_DIM}"),
            });
        }
        for (label, psi) in [("psi_plus", psi_plus), ("psi_minus", psi_minus)] {
            if psi.dim() != m || psi.degree() != n {
                return Err(Error::Schema(format!(
                    "{label} must be a degree-{n} form on R^{m}, got degree {} on R^{}",
                    psi.degree(),
                    psi.dim()
                )));
            }
        }

        let norm_defect =
            (psi_plus.inner(psi_plus) + psi_minus.inner(psi_minus) - (1u64 << n) as f64).abs();
        if norm_defect > TOL {
            return Err(Error::invariant("complex volume normalization", norm_defect));
        }
        let cross = psi_plus.inner(psi_minus).abs();
        if cross > TOL {
            return Err(Error::invariant("psi inner orthogonality", cross));
        }
        let mut slot = 0f64;
        for i in 0..n {
            let rotated = slot_apply(SlotOperatorKind::SingleSlot(i), psi_plus, i_mat);
            slot = slot.max(rotated.residual_to(psi_minus));
        }
        if slot > TOL {
            return Err(Error::invariant("slot rotation sends psi_plus to psi_minus", slot));
        }
        let mut anti = 0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let twice = slot_apply(
                    SlotOperatorKind::SingleSlot(j),
                    &slot_apply(SlotOperatorKind::SingleSlot(i), psi_plus, i_mat),
                    i_mat,
                );
                anti = anti.max(twice.residual_to(&-psi_plus));
            }
        }
        if anti > TOL {
            return Err(Error::invariant("psi anti invariance", anti));
        }

        let mut frame = unitary_frame(i_mat)?;
        let zr = psi_plus.eval(&frame);
        let zi = psi_minus.eval(&frame);
        let zmod = zr.hypot(zi);
        if (zmod - 1.0).abs() > TOL {
            return Err(Error::invariant("complex volume normalization", (zmod - 1.0).abs()));
        }
        // multiply u_1 by conj(z)/|z| so Ψ evaluates to one on the frame
        let iu = frame[0].apply(i_mat);
        frame[0] = frame[0].scaled(zr / zmod).add(&iu.scaled(-zi / zmod));

        let indices: Vec<usize> = (0..n).collect();
        let (re, im) = complex_monomial(&frame, i_mat, &indices);
        let rebuild = re.residual_to(psi_plus).max(im.residual_to(psi_minus));
        if rebuild > TOL {
            return Err(Error::invariant("complex volume reconstruction", rebuild));
        }

        let mut basis = frame;
        for k in 0..n {
            let iu = basis[k].apply(i_mat);
            basis.push(iu);
        }
        let mut vol = Form::scalar(m, 1.0);
        for u in &basis {
            vol = vol.wedge(&u.one_form());
        }
        let s = SUStructure {
            n,
            i_mat: i_mat.clone(),
            omega: omega_from_i(i_mat),
            psi_plus: psi_plus.clone(),
            psi_minus: psi_minus.clone(),
            vol,
            basis,
        };
        s.ensure_valid(TOL)?;
        Ok(s)
    }

    /// Complex dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension 2n.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn i_mat(&self) -> &DMatrix<f64> {
        &self.i_mat
    }

    pub fn omega(&self) -> &Form {
        &self.omega
    }

    pub fn psi_plus(&self) -> &Form {
        &self.psi_plus
    }

    pub fn psi_minus(&self) -> &Form {
        &self.psi_minus
    }

    pub fn vol(&self) -> &Form {
        &self.vol
    }

    /// Adapted orthonormal basis u_1, ..., u_n, Iu_1, ..., Iu_n.
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// The unitary half u_1, ..., u_n of the adapted basis.
    pub fn frame(&self) -> &[Vector] {
        &self.basis[..self.n]
    }

    /// Hodge star with respect to the structure volume form.
    pub fn star(&self, a: &Form) -> Form {
        a.hodge_with(&self.vol)
    }

    /// I applied to a vector (equivalently, −µ(I·) on the dual one-form).
    pub fn apply_i(&self, x: &Vector) -> Vector {
        x.apply(&self.i_mat)
    }

    /// Orthogonal projection onto the I-anti-invariant forms of the same
    /// degree, using the structure's own adapted frame.
    pub fn lambda_project(&self, a: &Form) -> Form {
        lambda_project_with_frame(a, self.frame(), &self.i_mat)
    }

    /// Run every defining identity and report its residual.
    pub fn validate(&self) -> Vec<CheckResult> {
        let n = self.n;
        let m = 2 * n;
        let mut out = Vec::new();
        let mut push = |name: &'static str, residual: f64| out.push(CheckResult { name, residual });

        let eye = DMatrix::identity(m, m);
        push("I is orthogonal", (self.i_mat.transpose() * &self.i_mat - &eye).amax());
        push("I squared is minus identity", (&self.i_mat * &self.i_mat + &eye).amax());
        push("omega matches I", self.omega.residual_to(&omega_from_i(&self.i_mat)));

        let mut gram = 0f64;
        for (a, u) in self.basis.iter().enumerate() {
            for (b, v) in self.basis.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                gram = gram.max((u.dot(v) - want).abs());
            }
        }
        push("adapted basis is orthonormal", gram);
        let mut paired = 0f64;
        for k in 0..n {
            paired = paired.max(self.basis[k].apply(&self.i_mat).residual_to(&self.basis[n + k]));
        }
        push("adapted basis pairs with I", paired);

        let norm_defect = self.psi_plus.inner(&self.psi_plus) + self.psi_minus.inner(&self.psi_minus)
            - (1u64 << n) as f64;
        push("complex volume normalization", norm_defect.abs());
        push("psi inner orthogonality", self.psi_plus.inner(&self.psi_minus).abs());

        let mut slot = 0f64;
        for i in 0..n {
            let rotated = slot_apply(SlotOperatorKind::SingleSlot(i), &self.psi_plus, &self.i_mat);
            slot = slot.max(rotated.residual_to(&self.psi_minus));
        }
        push("slot rotation sends psi_plus to psi_minus", slot);

        if n >= 2 {
            let mut anti = 0f64;
            for psi in [&self.psi_plus, &self.psi_minus] {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let twice = slot_apply(
                            SlotOperatorKind::SingleSlot(j),
                            &slot_apply(SlotOperatorKind::SingleSlot(i), psi, &self.i_mat),
                            &self.i_mat,
                        );
                        anti = anti.max(twice.residual_to(&-psi));
                    }
                }
            }
            push("psi anti invariance", anti);
        }

        let frame = self.frame().to_vec();
        push(
            "psi evaluates to one on the adapted basis",
            (self.psi_plus.eval(&frame) - 1.0).abs() + self.psi_minus.eval(&frame).abs(),
        );
        let mut vol = Form::scalar(m, 1.0);
        for u in &self.basis {
            vol = vol.wedge(&u.one_form());
        }
        push("volume matches adapted basis", self.vol.residual_to(&vol));

        let mut omega_n = Form::scalar(m, 1.0);
        for _ in 0..n {
            omega_n = omega_n.wedge(&self.omega);
        }
        let factorial: f64 = (1..=n).product::<usize>() as f64;
        let sign = if (n * (n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        push("omega power volume constant", omega_n.residual_to(&self.vol.scaled(sign * factorial)));

        if n >= 2 {
            // for n = 1 the wedge overflows the top degree and vanishes trivially
            push(
                "psi wedge omega vanishes",
                self.psi_plus.wedge(&self.omega).max_abs()
                    + self.psi_minus.wedge(&self.omega).max_abs(),
            );
        }
        let half = self.vol.scaled(sign * (1u64 << (n - 1)) as f64);
        let pp = self.psi_plus.wedge(&self.psi_plus);
        let mm = self.psi_minus.wedge(&self.psi_minus);
        let pm = self.psi_plus.wedge(&self.psi_minus);
        let wedge_resid = if n % 2 == 1 {
            pm.residual_to(&-&half) + pp.max_abs() + mm.max_abs()
        } else {
            pp.residual_to(&half) + mm.residual_to(&half) + pm.max_abs()
        };
        push("psi wedge psi volume constant", wedge_resid);

        let mut samples: Vec<Vector> = (0..m).map(|k| Vector::basis(m, k)).collect();
        let mut gen = XorShift64Star::new(0x5EED);
        for _ in 0..8 {
            samples.push(Vector::from_coords(gen.uniform_vec(m)));
        }

        let mut vector_resid = 0f64;
        for (idx, x) in samples.iter().enumerate() {
            let ix = self.apply_i(x);
            let lhs = x.one_form().wedge(&self.psi_plus);
            vector_resid = vector_resid.max(lhs.residual_to(&ix.one_form().wedge(&self.psi_minus)));
            let contracted = -&self.psi_plus.interior(&ix).wedge(&self.omega);
            vector_resid = vector_resid.max(lhs.residual_to(&contracted));
            vector_resid = vector_resid.max(
                self.psi_plus.interior(x).residual_to(&self.psi_minus.interior(&ix)),
            );
            if n >= 2 {
                let y = &samples[(idx + 1) % samples.len()];
                let lhs2 = self.psi_plus.interior_bivector(&ix, y);
                let rhs2 = self.psi_minus.interior_bivector(x, y).scaled(-1.0);
                vector_resid = vector_resid.max(lhs2.residual_to(&rhs2));
            }
        }
        push("vector wedge and contraction identities", vector_resid);

        if n >= 2 {
            let scale = (1u64 << (n - 2)) as f64;
            let mut star_resid = 0f64;
            for mu in &samples {
                let muf = mu.one_form();
                let imu = self.apply_i(mu).one_form();
                let spp = self.star(&self.star(&muf.wedge(&self.psi_plus)).wedge(&self.psi_plus));
                star_resid = star_resid.max(spp.residual_to(&muf.scaled(-scale)));
                let smm = self.star(&self.star(&muf.wedge(&self.psi_minus)).wedge(&self.psi_minus));
                star_resid = star_resid.max(smm.residual_to(&muf.scaled(-scale)));
                let smp = self.star(&self.star(&muf.wedge(&self.psi_minus)).wedge(&self.psi_plus));
                star_resid = star_resid.max(smp.residual_to(&imu.scaled(scale)));
                let spm = self.star(&self.star(&muf.wedge(&self.psi_plus)).wedge(&self.psi_minus));
                star_resid = star_resid.max(spm.residual_to(&imu.scaled(-scale)));
            }
            push("one form star identities", star_resid);
        }

        out
    }

    /// Largest residual across [`SUStructure::validate`].
    pub fn max_residual(&self) -> f64 {
        self.validate().iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Error out on the worst check if it exceeds the tolerance.
    pub fn ensure_valid(&self, tol: f64) -> Result<()> {
        let checks = self.validate();
        let worst = checks
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("validation list is nonempty");
        if worst.residual > tol {
            return Err(Error::invariant(worst.name, worst.residual));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::binomial;

    #[test]
    fn standard_structures_validate() {
        for n in 1..=MAX_COMPLEX_DIM {
            let s = standard_structure(n).unwrap();
            for check in s.validate() {
                assert!(check.residual < 1e-10, "n = {n}, check `{}`: {}", check.name, check.residual);
            }
        }
    }

    #[test]
    fn dimension_range_is_enforced() {
        assert!(standard_structure(0).is_err());
        assert!(standard_structure(MAX_COMPLEX_DIM + 1).is_err());
    }

    #[test]
    fn one_dimensional_model() {
        let s = standard_structure(1).unwrap();
        assert_eq!(s.psi_plus().coeff(&[0]), 1.0);
        assert_eq!(s.psi_plus().coeff(&[1]), 0.0);
        assert_eq!(s.psi_minus().coeff(&[1]), 1.0);
        assert_eq!(s.omega().coeff(&[0, 1]), -1.0);
        assert_eq!(s.vol().coeff(&[0, 1]), 1.0);
    }

    #[test]
    fn two_dimensional_model() {
        let s = standard_structure(2).unwrap();
        // ψ₊ = e₁∧e₂ − Ie₁∧Ie₂, ψ₋ = e₁∧Ie₂ + Ie₁∧e₂
        assert_eq!(s.psi_plus().coeff(&[0, 1]), 1.0);
        assert_eq!(s.psi_plus().coeff(&[2, 3]), -1.0);
        assert_eq!(s.psi_minus().coeff(&[0, 3]), 1.0);
        assert_eq!(s.psi_minus().coeff(&[1, 2]), -1.0);
        assert_eq!(s.omega().coeff(&[0, 2]), -1.0);
        assert_eq!(s.omega().coeff(&[1, 3]), -1.0);
    }

    #[test]
    fn star_of_psi_table() {
        // ∗ψ₊ = −(−1)^{n(n+1)/2} ψ₋ and ∗ψ₋ = (−1)^{n(n+1)/2} ψ₊ for n odd;
        // both ∗ψ± = (−1)^{n(n+1)/2} ψ± for n even
        for n in 1..=5 {
            let s = standard_structure(n).unwrap();
            let sign = if (n * (n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if n % 2 == 1 {
                assert!(s.star(s.psi_plus()).residual_to(&s.psi_minus().scaled(-sign)) < 1e-12);
                assert!(s.star(s.psi_minus()).residual_to(&s.psi_plus().scaled(sign)) < 1e-12);
            } else {
                assert!(s.star(s.psi_plus()).residual_to(&s.psi_plus().scaled(sign)) < 1e-12);
                assert!(s.star(s.psi_minus()).residual_to(&s.psi_minus().scaled(sign)) < 1e-12);
            }
        }
    }

    #[test]
    fn omega_inner_norm() {
        for n in 1..=4 {
            let s = standard_structure(n).unwrap();
            assert!((s.omega().inner(s.omega()) - n as f64).abs() < 1e-12);
            assert!(
                (s.psi_plus().inner(s.psi_plus()) - (1u64 << (n - 1)) as f64).abs() < 1e-12
            );
        }
    }

    fn special_orthogonal(gen: &mut XorShift64Star, m: usize) -> DMatrix<f64> {
        let raw = DMatrix::from_fn(m, m, |_, _| gen.uniform());
        let qr = raw.qr();
        let mut q = qr.q();
        let r = qr.r();
        for k in 0..m {
            if r[(k, k)] < 0.0 {
                for row in 0..m {
                    q[(row, k)] = -q[(row, k)];
                }
            }
        }
        if q.determinant() < 0.0 {
            for row in 0..m {
                q[(row, 0)] = -q[(row, 0)];
            }
        }
        q
    }

    #[test]
    fn adapt_recovers_rotated_structure() {
        let mut gen = XorShift64Star::new(11);
        for n in [2usize, 3] {
            let m = 2 * n;
            let s = standard_structure(n).unwrap();
            let rot = special_orthogonal(&mut gen, m);
            let rot_t = rot.transpose();
            let i_new = &rot * s.i_mat() * &rot_t;
            let psi_plus = s.psi_plus().pullback(&rot_t);
            let psi_minus = s.psi_minus().pullback(&rot_t);
            let adapted = SUStructure::adapt(&i_new, &psi_plus, &psi_minus).unwrap();
            assert!(adapted.max_residual() < 1e-8, "n = {n}");
            assert!(adapted.omega().residual_to(&s.omega().pullback(&rot_t)) < 1e-10);
            assert!(adapted.vol().residual_to(&s.vol().pullback(&rot_t)) < 1e-10);
        }
    }

    #[test]
    fn adapt_absorbs_a_global_phase() {
        let s = standard_structure(3).unwrap();
        let (alpha_cos, alpha_sin) = (0.6, 0.8);
        let psi_plus = &s.psi_plus().scaled(alpha_cos) - &s.psi_minus().scaled(alpha_sin);
        let psi_minus = &s.psi_plus().scaled(alpha_sin) + &s.psi_minus().scaled(alpha_cos);
        let adapted = SUStructure::adapt(s.i_mat(), &psi_plus, &psi_minus).unwrap();
        assert!(adapted.max_residual() < 1e-10);
        let frame = adapted.frame().to_vec();
        assert!((psi_plus.eval(&frame) - 1.0).abs() < 1e-10);
        assert!(psi_minus.eval(&frame).abs() < 1e-10);
        assert!(adapted.omega().residual_to(s.omega()) < 1e-12);
        assert!(adapted.vol().residual_to(s.vol()) < 1e-10);
    }

    #[test]
    fn adapt_rejects_bad_normalization() {
        let s = standard_structure(2).unwrap();
        let doubled = s.psi_plus().scaled(2.0);
        let err = SUStructure::adapt(s.i_mat(), &doubled, s.psi_minus()).unwrap_err();
        match err {
            Error::InvariantViolation { name, .. } => {
                assert_eq!(name, "complex volume normalization")
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn adapt_rejects_swapped_psi() {
        let s = standard_structure(2).unwrap();
        let err = SUStructure::adapt(s.i_mat(), s.psi_minus(), s.psi_plus()).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }));
    }

    #[test]
    fn scaled_psi_norm_defect_value() {
        // doubling ψ₊ moves the normalization check by 3·2^{n−1}
        let n = 3;
        let s = standard_structure(n).unwrap();
        let mut broken = s.clone();
        broken.psi_plus = s.psi_plus().scaled(2.0);
        let defect = broken
            .validate()
            .into_iter()
            .find(|c| c.name == "complex volume normalization")
            .unwrap()
            .residual;
        assert!((defect - 3.0 * (1u64 << (n - 1)) as f64).abs() < 1e-12);
    }

    #[test]
    fn lambda_dimensions_from_structure_frame() {
        let s = standard_structure(3).unwrap();
        let basis = crate::hermitian::lambda_basis(s.frame(), s.i_mat(), 2);
        assert_eq!(basis.len(), 2 * binomial(3, 2));
    }
}
