//! First-order torsion data of a special almost Hermitian structure.
//!
//! A torsion jet packages the pointwise first derivatives of the defining
//! forms: a one-form `eta` driving the rotation of the complex volume form
//! and, for every coordinate direction, a skew matrix `xi_a` anticommuting
//! with the complex structure.  Every first-order quantity of the geometry
//! (covariant rates, exterior derivatives, coderivatives, component splits)
//! is a finite-dimensional linear function of this data, so the module
//! computes them exactly at a point.

use nalgebra::{DMatrix, DVector, Dyn, SVD};

use crate::coform::CoForm;
use crate::error::{Error, Result};
use crate::form::{Form, Vector};
use crate::hermitian::{lambda_basis, slot_apply_coform, SlotOperatorKind};
use crate::rng::XorShift64Star;
use crate::structure::{ConformalChange, SUStructure};

/// Tolerance for the algebraic invariants of jet data.  Loose enough to
/// admit hand-written fixtures, far above the noise of derived data.
pub const JET_TOL: f64 = 1e-6;

/// Pointwise first-order torsion data attached to a structure.
#[derive(Clone, Debug)]
pub struct SUTorsionJet {
    structure: SUStructure,
    eta: Vector,
    xi: Vec<DMatrix<f64>>,
}

impl SUTorsionJet {
    /// Validates and wraps jet data.  Each `xi[a]` must be skew and must
    /// anticommute with the complex structure.
    pub fn new(structure: SUStructure, eta: Vector, xi: Vec<DMatrix<f64>>) -> Result<Self> {
        let m = structure.dim();
        if eta.dim() != m {
            return Err(Error::Schema(format!(
                "eta has {} coordinates, expected {}",
                eta.dim(),
                m
            )));
        }
        if xi.len() != m {
            return Err(Error::Schema(format!(
                "xi has {} directions, expected {}",
                xi.len(),
                m
            )));
        }
        let i_mat = structure.i_mat();
        for x in &xi {
            if x.nrows() != m || x.ncols() != m {
                return Err(Error::Schema(format!(
                    "xi block is {}x{}, expected {}x{}",
                    x.nrows(),
                    x.ncols(),
                    m,
                    m
                )));
            }
            let scale = 1f64.max(x.norm());
            let skew = (x + x.transpose()).norm() / scale;
            if skew > JET_TOL {
                return Err(Error::invariant("xi skew symmetry", skew));
            }
            let anti = (i_mat * x + x * i_mat).norm() / scale;
            if anti > JET_TOL {
                return Err(Error::invariant("xi anticommutes with I", anti));
            }
        }
        Ok(SUTorsionJet { structure, eta, xi })
    }

    pub fn zero(structure: SUStructure) -> Self {
        let m = structure.dim();
        SUTorsionJet {
            structure,
            eta: Vector::zeros(m),
            xi: vec![DMatrix::zeros(m, m); m],
        }
    }

    /// Uniformly random jet with entries of order one.
    pub fn random(structure: SUStructure, seed: u64) -> Self {
        let mut rng = XorShift64Star::new(seed);
        let m = structure.dim();
        let eta = Vector::from_coords(rng.uniform_vec(m));
        let xi = (0..m)
            .map(|_| random_skew_anticommuting(&mut rng, structure.i_mat()))
            .collect();
        SUTorsionJet { structure, eta, xi }
    }

    pub fn structure(&self) -> &SUStructure {
        &self.structure
    }

    pub fn eta(&self) -> &Vector {
        &self.eta
    }

    pub fn xi(&self) -> &[DMatrix<f64>] {
        &self.xi
    }

    /// Covariant rate of the Kähler form: component `a` is the two-form
    /// with matrix `2 I xi_a`.
    pub fn nabla_omega(&self) -> CoForm {
        let i_mat = self.structure.i_mat();
        let comps = self
            .xi
            .iter()
            .map(|x| {
                let b = Form::from_skew_matrix(&(2.0 * (i_mat * x)));
                debug_assert!(
                    b.residual_to(&self.structure.omega().lie_act(x).scaled(-1.0)) < 1e-10,
                    "omega rate disagrees with the direct skew action"
                );
                b
            })
            .collect();
        CoForm::from_components(comps)
    }

    /// All first derivatives of the defining forms determined by the jet.
    pub fn derive(&self) -> DerivedDerivatives {
        let s = &self.structure;
        let m = s.dim();
        let n = s.n() as f64;
        let nabla_omega = self.nabla_omega();
        let i_eta = self.eta.apply(s.i_mat());
        let mut plus = Vec::with_capacity(m);
        let mut minus = Vec::with_capacity(m);
        for a in 0..m {
            let rate = nabla_omega.component(a);
            let mut p = psi_rate_form(rate, s.psi_minus(), 0.5);
            debug_assert!(
                p.residual_to(&s.psi_plus().lie_act(&self.xi[a]).scaled(-1.0)) < 1e-9,
                "psi_plus rate disagrees with the direct skew action"
            );
            p.add_scaled_assign(s.psi_minus(), -n * i_eta.coords[a]);
            let mut q = psi_rate_form(rate, s.psi_plus(), -0.5);
            debug_assert!(
                q.residual_to(&s.psi_minus().lie_act(&self.xi[a]).scaled(-1.0)) < 1e-9,
                "psi_minus rate disagrees with the direct skew action"
            );
            q.add_scaled_assign(s.psi_plus(), n * i_eta.coords[a]);
            plus.push(p);
            minus.push(q);
        }
        let nabla_psi_plus = CoForm::from_components(plus);
        let nabla_psi_minus = CoForm::from_components(minus);
        // For n = 1 the alternation of the omega rate overflows the top
        // degree; the rate itself vanishes there (no skew matrix on R^2
        // anticommutes with the rotation), so use the zero top form.
        let d_omega = if nabla_omega.degree() < m {
            nabla_omega.alternate()
        } else {
            Form::zero(m, m)
        };
        DerivedDerivatives {
            d_omega,
            d_psi_plus: nabla_psi_plus.alternate(),
            d_psi_minus: nabla_psi_minus.alternate(),
            dstar_omega: nabla_omega.codifferential().to_vector(),
            dstar_psi_plus: nabla_psi_plus.codifferential(),
            dstar_psi_minus: nabla_psi_minus.codifferential(),
            dstar_om_psi_plus: nabla_psi_plus.codifferential_twisted(s.i_mat()),
            dstar_om_psi_minus: nabla_psi_minus.codifferential_twisted(s.i_mat()),
            nabla_omega,
            nabla_psi_plus,
            nabla_psi_minus,
        }
    }

    /// Jet of the structure rescaled by a conformal factor with the given
    /// differential at the point.  Needs `n >= 2`; the one-dimensional case
    /// has its own rule because there is no skew block.
    pub fn conformal_transform(&self, change: &ConformalChange) -> Result<SUTorsionJet> {
        let s = &self.structure;
        let n = s.n();
        if n < 2 {
            return Err(Error::UnsupportedDimension {
                n,
                reason: "conformal change of the jet needs n >= 2".into(),
            });
        }
        if change.df.dim() != s.dim() {
            return Err(Error::Schema(format!(
                "df has {} coordinates, expected {}",
                change.df.dim(),
                s.dim()
            )));
        }
        let eta = self.eta.sub(&change.df.scaled(1.0 / n as f64));
        let i_df = change.df.apply(s.i_mat());
        let shift = coderivative_part(s, &i_df.scaled(2.0 * (n as f64 - 1.0)));
        let mut xi = self.xi.clone();
        for (a, x) in xi.iter_mut().enumerate() {
            *x += xi_from_two_form(s.i_mat(), shift.component(a));
        }
        SUTorsionJet::new(s.clone(), eta, xi)
    }
}

/// First derivatives of the defining forms of a structure.
#[derive(Clone, Debug)]
pub struct DerivedDerivatives {
    pub nabla_omega: CoForm,
    pub nabla_psi_plus: CoForm,
    pub nabla_psi_minus: CoForm,
    pub d_omega: Form,
    pub d_psi_plus: Form,
    pub d_psi_minus: Form,
    pub dstar_omega: Vector,
    pub dstar_psi_plus: Form,
    pub dstar_psi_minus: Form,
    /// Coderivative twisted by the complex structure, contracting with
    /// `I e_a` instead of `e_a`.
    pub dstar_om_psi_plus: Form,
    pub dstar_om_psi_minus: Form,
}

fn random_skew_anticommuting(rng: &mut XorShift64Star, i_mat: &DMatrix<f64>) -> DMatrix<f64> {
    let m = i_mat.nrows();
    let raw = DMatrix::from_fn(m, m, |_, _| rng.uniform());
    let skew = (&raw - raw.transpose()) * 0.5;
    // Remove the part commuting with I; what is left anticommutes.
    (&skew + i_mat * &skew * i_mat) * 0.5
}

/// Skew matrix of the structure rotation generated by a two-form rate.
pub fn xi_from_two_form(i_mat: &DMatrix<f64>, rate: &Form) -> DMatrix<f64> {
    -0.5 * (i_mat * rate.to_skew_matrix())
}

/// Builds a jet from a Kähler-form rate, deriving the skew blocks from the
/// two-form components.  Fails if a component does not anticommute with I.
pub fn jet_from_nabla_omega(
    structure: SUStructure,
    eta: Vector,
    rate: &CoForm,
) -> Result<SUTorsionJet> {
    let xi = rate
        .components()
        .iter()
        .map(|c| xi_from_two_form(structure.i_mat(), c))
        .collect();
    SUTorsionJet::new(structure, eta, xi)
}

/// Contraction pairing sending a form rate to the induced rate on another
/// form: `scale * sum_i (e_i ⌟ rate) ∧ (e_i ⌟ psi)`.
fn psi_rate_form(rate: &Form, psi: &Form, scale: f64) -> Form {
    let m = rate.dim();
    let mut out = Form::zero(m, rate.degree() + psi.degree() - 2);
    for i in 0..m {
        let e = Vector::basis(m, i);
        out.add_scaled_assign(&rate.interior(&e).wedge(&psi.interior(&e)), scale);
    }
    out
}

/// Rate of the real part of the complex volume form induced by a rate of
/// the Kähler form with skew-rotation components.
pub fn psi_rate_plus(s: &SUStructure, rate: &CoForm) -> CoForm {
    rate.map(|c| psi_rate_form(c, s.psi_minus(), 0.5))
}

/// Rate of the imaginary part of the complex volume form induced by a rate
/// of the Kähler form.
pub fn psi_rate_minus(s: &SUStructure, rate: &CoForm) -> CoForm {
    rate.map(|c| psi_rate_form(c, s.psi_plus(), -0.5))
}

/// Least-squares inverse of the pointwise map underlying `psi_rate_plus`,
/// restricted to two-forms that anticommute with the complex structure.
pub struct PsiRateInverse {
    m: usize,
    basis: Vec<Form>,
    matrix: DMatrix<f64>,
    svd: SVD<f64, Dyn, Dyn>,
    rank: usize,
}

impl PsiRateInverse {
    pub fn new(s: &SUStructure) -> Self {
        let m = s.dim();
        let basis = lambda_basis(s.frame(), s.i_mat(), 2);
        let rows = Form::zero(m, s.n()).coeffs().len();
        let mut matrix = DMatrix::zeros(rows, basis.len());
        for (j, b) in basis.iter().enumerate() {
            let image = psi_rate_form(b, s.psi_minus(), 0.5);
            for (i, v) in image.coeffs().iter().enumerate() {
                matrix[(i, j)] = *v;
            }
        }
        let svd = SVD::new(matrix.clone(), true, true);
        let top = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&v| v > 1e-10 * top.max(1.0))
            .count();
        PsiRateInverse {
            m,
            basis,
            matrix,
            svd,
            rank,
        }
    }

    /// Rank of the pointwise map on a single component.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Dimension of the pointwise kernel on a single component.
    pub fn kernel_dim(&self) -> usize {
        self.basis.len() - self.rank
    }

    /// Recovers the two-form mapping to `image`; rejects inputs farther
    /// than `tol` (relative) from the image subspace.
    pub fn apply_form(&self, image: &Form, tol: f64) -> Result<Form> {
        let rhs = DVector::from_column_slice(image.coeffs());
        let x = self
            .svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Schema(e.to_string()))?;
        let residual = (&self.matrix * &x - &rhs).norm() / rhs.norm().max(1.0);
        if residual > tol {
            return Err(Error::OffImage { residual });
        }
        let mut out = Form::zero(self.m, 2);
        for (j, b) in self.basis.iter().enumerate() {
            out.add_scaled_assign(b, x[j]);
        }
        Ok(out)
    }

    pub fn apply(&self, image: &CoForm, tol: f64) -> Result<CoForm> {
        let comps: Result<Vec<Form>> = image
            .components()
            .iter()
            .map(|c| self.apply_form(c, tol))
            .collect();
        Ok(CoForm::from_components(comps?))
    }
}

/// Kähler-form rate determined by a prescribed coderivative one-form `mu`:
/// component `a` is `(-e_a ∧ mu + (I e_a) ∧ (I mu)) / (2(n-1))`.  Its
/// coderivative is exactly `mu` and it is orthogonal to the other parts.
pub fn coderivative_part(s: &SUStructure, mu: &Vector) -> CoForm {
    let n = s.n();
    assert!(n >= 2, "the coderivative-driven part needs n >= 2");
    let m = s.dim();
    let scale = 1.0 / (2.0 * (n as f64 - 1.0));
    let i_mu = mu.apply(s.i_mat()).one_form();
    let mu_form = mu.one_form();
    let mut comps = Vec::with_capacity(m);
    for a in 0..m {
        let e = Vector::basis(m, a);
        let ie = e.apply(s.i_mat());
        let mut c = ie.one_form().wedge(&i_mu);
        c.add_scaled_assign(&e.one_form().wedge(&mu_form), -1.0);
        comps.push(c.scaled(scale));
    }
    CoForm::from_components(comps)
}

/// Kähler-form rate whose alternation is three times the totally skew
/// parameter `c`; component `a` is `e_a ⌟ c`.
pub fn skew_part_from_parameter(c: &Form) -> CoForm {
    CoForm::from_form(c)
}

/// Rate of the real volume part produced by a totally skew rate with
/// parameter `b` of degree `n - 3`.
pub fn w1_psi_rate(s: &SUStructure, b: &Form) -> CoForm {
    let m = s.dim();
    assert!(s.n() >= 4, "the parameterized shape needs n >= 4");
    assert_eq!(b.degree(), s.n() - 3);
    let i1b = b.slot_single(0, s.i_mat());
    let omega = s.omega();
    let mut comps = Vec::with_capacity(m);
    for a in 0..m {
        let e = Vector::basis(m, a);
        let ie = e.apply(s.i_mat());
        let mut c = ie.one_form().wedge(&b.wedge(omega));
        c.add_scaled_assign(&e.one_form().wedge(&i1b.wedge(omega)), 1.0);
        comps.push(c);
    }
    CoForm::from_components(comps)
}

/// Rate of the real volume part produced by a coderivative-driven rate
/// with one-form parameter `x`: component `a` is `((x ∧ e_a) ⌟ psi_plus) ∧ omega`.
pub fn w4_psi_rate(s: &SUStructure, x: &Vector) -> CoForm {
    let m = s.dim();
    let mut comps = Vec::with_capacity(m);
    for a in 0..m {
        let e = Vector::basis(m, a);
        comps.push(s.psi_plus().interior_bivector(x, &e).wedge(s.omega()));
    }
    CoForm::from_components(comps)
}

/// Coupling operator on volume-part rates: composition of the direction
/// rotation with the sum of single-slot rotations of the form part.
pub fn direction_coupling(s: &SUStructure, rate: &CoForm) -> CoForm {
    slot_apply_coform(SlotOperatorKind::DirectionCoupling, rate, s.i_mat())
}

/// Spectral projector onto the coupling eigenvalue `n - 2` within the
/// image of `psi_rate_plus`; the complement has eigenvalue `-(n - 2)`.
pub fn psi_rate_low_pair(s: &SUStructure, image: &CoForm) -> CoForm {
    let n = s.n() as f64;
    let mut out = image.scaled(0.5);
    out.add_scaled_assign(&direction_coupling(s, image), 0.5 / (n - 2.0));
    out
}

/// Splits a Kähler-form rate into its four canonical parts.  Needs
/// `n >= 3`; lower dimensions use their own closed-form splits.
pub fn class_split(
    s: &SUStructure,
    rate: &CoForm,
    inv: &PsiRateInverse,
) -> Result<[CoForm; 4]> {
    let n = s.n();
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "the four-part split needs n >= 3".into(),
        });
    }
    let w4 = coderivative_part(s, &rate.codifferential().to_vector());
    let w1 = CoForm::from_form(&s.lambda_project(&rate.alternate()).scaled(1.0 / 3.0));
    let image = psi_rate_plus(s, rate);
    let w12 = inv.apply(&psi_rate_low_pair(s, &image), 1e-7)?;
    let mut w2 = w12.clone();
    w2.add_scaled_assign(&w1, -1.0);
    let mut w3 = rate.clone();
    w3.add_scaled_assign(&w12, -1.0);
    w3.add_scaled_assign(&w4, -1.0);
    Ok([w1, w2, w3, w4])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::standard_structure;

    fn random_anti_invariant_rate(s: &SUStructure, seed: u64) -> CoForm {
        let jet = SUTorsionJet::random(s.clone(), seed);
        jet.nabla_omega()
    }

    #[test]
    fn zero_jet_has_zero_derivatives() {
        let s = standard_structure(2).unwrap();
        let d = SUTorsionJet::zero(s).derive();
        assert!(d.nabla_omega.is_zero());
        assert!(d.d_psi_plus.is_zero());
        assert!(d.dstar_omega.norm() == 0.0);
    }

    #[test]
    fn random_jet_components_anticommute() {
        for n in 1..=4 {
            let s = standard_structure(n).unwrap();
            let jet = SUTorsionJet::random(s.clone(), 7 + n as u64);
            let rate = jet.nabla_omega();
            for c in rate.components() {
                // Anticommuting skew blocks give two-forms odd under I.
                let pulled = c.pullback(s.i_mat());
                assert!(pulled.residual_to(&c.scaled(-1.0)) < 1e-12);
            }
            // Round trip through the matrix bridge.
            let back = jet_from_nabla_omega(s, jet.eta().clone(), &rate).unwrap();
            for (x, y) in jet.xi().iter().zip(back.xi()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jet_validation_rejects_bad_blocks() {
        let s = standard_structure(2).unwrap();
        let m = s.dim();
        let mut xi = vec![DMatrix::zeros(m, m); m];
        xi[0][(0, 1)] = 1.0;
        xi[0][(1, 0)] = -1.0;
        // Skew but commuting with I in the (0,1)-plane pairing.
        let err = SUTorsionJet::new(s.clone(), Vector::zeros(m), xi).unwrap_err();
        match err {
            Error::InvariantViolation { name, .. } => {
                assert_eq!(name, "xi anticommutes with I")
            }
            other => panic!("unexpected error {other:?}"),
        }
        let mut sym = vec![DMatrix::zeros(m, m); m];
        sym[1][(0, 1)] = 1.0;
        sym[1][(1, 0)] = 1.0;
        let err = SUTorsionJet::new(s, Vector::zeros(m), sym).unwrap_err();
        match err {
            Error::InvariantViolation { name, .. } => assert_eq!(name, "xi skew symmetry"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn eta_only_jet_differentials() {
        for n in 1..=4 {
            let s = standard_structure(n).unwrap();
            let m = s.dim();
            let mut rng = XorShift64Star::new(40 + n as u64);
            let eta = Vector::from_coords(rng.uniform_vec(m));
            let jet =
                SUTorsionJet::new(s.clone(), eta.clone(), vec![DMatrix::zeros(m, m); m]).unwrap();
            let d = jet.derive();
            assert!(d.d_omega.is_zero());
            assert!(d.dstar_omega.norm() < 1e-12);
            let expected = eta.one_form().wedge(s.psi_plus()).scaled(-(n as f64));
            assert!(d.d_psi_plus.residual_to(&expected) < 1e-12);
            let expected_minus = eta.one_form().wedge(s.psi_minus()).scaled(-(n as f64));
            assert!(d.d_psi_minus.residual_to(&expected_minus) < 1e-12);
        }
    }

    #[test]
    fn psi_rate_inverse_round_trip() {
        for n in 2..=4 {
            let s = standard_structure(n).unwrap();
            let inv = PsiRateInverse::new(&s);
            let rate = random_anti_invariant_rate(&s, 100 + n as u64);
            let image = psi_rate_plus(&s, &rate);
            if n == 2 {
                // The pointwise map has a kernel, so only the image part
                // comes back; check the forward map of the result agrees.
                let back = inv.apply(&image, 1e-7).unwrap();
                let again = psi_rate_plus(&s, &back);
                assert!(again.residual_to(&image) < 1e-9);
            } else {
                let back = inv.apply(&image, 1e-7).unwrap();
                assert!(back.residual_to(&rate) < 1e-8);
            }
        }
    }

    #[test]
    fn psi_rate_ranks_and_kernel() {
        let expected = |n: usize| n * (n - 1);
        for n in 3..=5 {
            let s = standard_structure(n).unwrap();
            let inv = PsiRateInverse::new(&s);
            assert_eq!(inv.rank(), expected(n), "rank at n = {n}");
            assert_eq!(inv.kernel_dim(), 0);
        }
        let s = standard_structure(2).unwrap();
        let inv = PsiRateInverse::new(&s);
        assert_eq!(inv.rank(), 1);
        assert_eq!(inv.kernel_dim(), 1);
        // The kernel is spanned by psi_minus.
        let killed = psi_rate_form(s.psi_minus(), s.psi_minus(), 0.5);
        assert!(killed.max_abs() < 1e-12);
        let alive = psi_rate_form(s.psi_plus(), s.psi_minus(), 0.5);
        assert!(alive.max_abs() > 0.5);
    }

    #[test]
    fn coderivative_part_reproduces_its_one_form() {
        for n in 2..=4 {
            let s = standard_structure(n).unwrap();
            let mut rng = XorShift64Star::new(9 + n as u64);
            let mu = Vector::from_coords(rng.uniform_vec(s.dim()));
            let rate = coderivative_part(&s, &mu);
            assert!(rate.codifferential().to_vector().residual_to(&mu) < 1e-12);
            for c in rate.components() {
                let pulled = c.pullback(s.i_mat());
                assert!(pulled.residual_to(&c.scaled(-1.0)) < 1e-12);
            }
            // No totally skew component hides inside.
            assert!(s.lambda_project(&rate.alternate()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn class_split_is_a_partition() {
        for n in 3..=4 {
            let s = standard_structure(n).unwrap();
            let inv = PsiRateInverse::new(&s);
            let rate = random_anti_invariant_rate(&s, 300 + n as u64);
            let parts = class_split(&s, &rate, &inv).unwrap();
            let mut sum = CoForm::zero(s.dim(), 2);
            for p in &parts {
                sum.add_scaled_assign(p, 1.0);
            }
            assert!(sum.residual_to(&rate) < 1e-8);
            // Idempotence: splitting a part returns the part in its slot.
            for (k, p) in parts.iter().enumerate() {
                if p.norm() < 1e-9 {
                    continue;
                }
                let again = class_split(&s, p, &inv).unwrap();
                for (j, q) in again.iter().enumerate() {
                    let target = if j == k { p.clone() } else { CoForm::zero(s.dim(), 2) };
                    assert!(
                        q.residual_to(&target) < 1e-7,
                        "n = {n}: part {k} leaked into slot {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn pure_part_generators_split_purely() {
        for n in 3..=4 {
            let s = standard_structure(n).unwrap();
            let inv = PsiRateInverse::new(&s);
            let mut rng = XorShift64Star::new(500 + n as u64);
            let mu = Vector::from_coords(rng.uniform_vec(s.dim()));
            let w4 = coderivative_part(&s, &mu);
            let parts = class_split(&s, &w4, &inv).unwrap();
            for (j, q) in parts.iter().enumerate() {
                if j == 3 {
                    assert!(q.residual_to(&w4) < 1e-9);
                } else {
                    assert!(q.norm() < 1e-9, "n = {n}: slot {j} not pure");
                }
            }
            let mut raw = Form::zero(s.dim(), 3);
            for v in raw.coeffs_mut() {
                *v = rng.uniform();
            }
            let c = s.lambda_project(&raw);
            let w1 = skew_part_from_parameter(&c);
            let parts = class_split(&s, &w1, &inv).unwrap();
            assert!(parts[0].residual_to(&w1) < 1e-8);
            for (j, q) in parts.iter().enumerate().skip(1) {
                assert!(q.norm() < 1e-8, "n = {n}: slot {j} not pure for skew part");
            }
        }
    }

    #[test]
    fn conformal_transform_moves_the_expected_parts() {
        for n in 2..=4 {
            let s = standard_structure(n).unwrap();
            let jet = SUTorsionJet::random(s.clone(), 800 + n as u64);
            let mut rng = XorShift64Star::new(900 + n as u64);
            let df = Vector::from_coords(rng.uniform_vec(s.dim()));
            let change = ConformalChange { df: df.clone() };
            let moved = jet.conformal_transform(&change).unwrap();
            let before = jet.derive();
            let after = moved.derive();
            // The coderivative one-form shifts so that its I-rotation drops
            // 2(n-1) df, and eta drops df / n.
            let nf = n as f64;
            let id_before = before.dstar_omega.apply(s.i_mat());
            let id_after = after.dstar_omega.apply(s.i_mat());
            let expected = id_before.sub(&df.scaled(2.0 * (nf - 1.0)));
            assert!(id_after.residual_to(&expected) < 1e-10);
            let expected_eta = jet.eta().sub(&df.scaled(1.0 / nf));
            assert!(moved.eta().residual_to(&expected_eta) < 1e-12);
            // Combined invariant: 2n(n-1) eta - I dstar_omega.
            let inv_before = jet.eta().scaled(2.0 * nf * (nf - 1.0)).sub(&id_before);
            let inv_after = moved.eta().scaled(2.0 * nf * (nf - 1.0)).sub(&id_after);
            assert!(inv_before.residual_to(&inv_after) < 1e-10);
        }
    }

    #[test]
    fn conformal_transform_rejects_n1() {
        let s = standard_structure(1).unwrap();
        let jet = SUTorsionJet::zero(s.clone());
        let change = ConformalChange { df: Vector::basis(2, 0) };
        assert!(jet.conformal_transform(&change).is_err());
    }
}
