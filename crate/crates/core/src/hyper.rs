//! Quaternionic structures on R^{4n}: three orthogonal complex structures
//! I, J, K = IJ that pairwise anticommute, acting by left quaternion
//! multiplication on H^n.  Each axis carries a special unitary structure in
//! complex dimension 2n whose complex volume is a wedge power of the other
//! two Kahler forms, so the whole triple is driven by a single
//! endomorphism-valued one-form with values in the orthogonal complement of
//! the quaternion-linear skew algebra.

use nalgebra::DMatrix;

use crate::coform::CoForm;
use crate::error::{Error, Result};
use crate::form::{Form, Vector};
use crate::recover::{
    classify, full_recover, report_from_jet, TorsionClass, DEFAULT_CLASSIFY_THRESHOLD, RECOVER_TOL,
};
use crate::rng::XorShift64Star;
use crate::structure::{omega_from_i, SUStructure, MAX_COMPLEX_DIM};
use crate::torsion::{DerivedDerivatives, SUTorsionJet, JET_TOL};

/// Axis labels in cyclic order.
pub const AXES: [&str; 3] = ["I", "J", "K"];

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn volume_sign(n: usize) -> f64 {
    if (n * (n + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Successors of an axis in the cyclic order I -> J -> K -> I.
fn cyclic(axis: usize) -> (usize, usize) {
    ((axis + 1) % 3, (axis + 2) % 3)
}

/// 4x4 block of left multiplication by i, j, or k on (1, i, j, k) coordinates.
fn left_block(unit: usize) -> DMatrix<f64> {
    let rows: [[f64; 4]; 4] = match unit {
        0 => [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [
            0.0, 0.0, 1.0, 0.0,
        ]],
        1 => [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [
            0.0, -1.0, 0.0, 0.0,
        ]],
        _ => [[0.0, 0.0, 0.0, -1.0], [0.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [
            1.0, 0.0, 0.0, 0.0,
        ]],
    };
    DMatrix::from_fn(4, 4, |r, c| rows[r][c])
}

fn block_diag(block: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(4 * n, 4 * n);
    for q in 0..n {
        out.view_mut((4 * q, 4 * q), (4, 4)).copy_from(block);
    }
    out
}

fn mat_residual(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x - y).norm() / x.norm().max(y.norm()).max(1.0)
}

/// Real and imaginary part of (re + i im)^k under the wedge product.
fn complex_wedge_power(re: &Form, im: &Form, k: usize) -> (Form, Form) {
    let m = re.dim();
    let mut pr = Form::scalar(m, 1.0);
    let mut pi = Form::zero(m, 0);
    for _ in 0..k {
        let mut nr = pr.wedge(re);
        nr.add_scaled_assign(&pi.wedge(im), -1.0);
        let mut ni = pr.wedge(im);
        ni.add_scaled_assign(&pi.wedge(re), 1.0);
        pr = nr;
        pi = ni;
    }
    (pr, pi)
}

/// Split the skew matrices on R^{4n} into the quaternion-linear algebra
/// (everything commuting with I and J) and its orthogonal complement.  Both
/// bases are orthonormal for the Frobenius inner product.
fn sp_split(mats: &[DMatrix<f64>; 3]) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let m = mats[0].nrows();
    let pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b))).collect();
    let k = pairs.len();
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let skew_basis: Vec<DMatrix<f64>> = pairs
        .iter()
        .map(|&(a, b)| {
            let mut s = DMatrix::zeros(m, m);
            s[(a, b)] = w;
            s[(b, a)] = -w;
            s
        })
        .collect();
    let mut constraints = DMatrix::zeros(2 * m * m, k);
    for (col, s) in skew_basis.iter().enumerate() {
        for (block, mat) in mats.iter().take(2).enumerate() {
            let comm = s * mat - mat * s;
            for r in 0..m {
                for q in 0..m {
                    constraints[(block * m * m + r * m + q, col)] = comm[(r, q)];
                }
            }
        }
    }
    let svd = constraints.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let top = svd.singular_values.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let tol = 1e-10 * top.max(1.0);
    let mut inside = Vec::new();
    let mut perp = Vec::new();
    for idx in 0..k {
        let mut mat = DMatrix::zeros(m, m);
        for col in 0..k {
            mat += v_t[(idx, col)] * &skew_basis[col];
        }
        if svd.singular_values[idx] > tol {
            perp.push(mat);
        } else {
            inside.push(mat);
        }
    }
    let n = m / 4;
    assert_eq!(inside.len(), n * (2 * n + 1), "quaternion-linear algebra dimension");
    assert_eq!(perp.len(), 3 * n * (2 * n - 1), "torsion fiber dimension");
    (inside, perp)
}

/// Flat quaternionic model on R^{4n} with its three adapted axis structures.
#[derive(Clone, Debug)]
pub struct HyperStructure {
    n: usize,
    mats: [DMatrix<f64>; 3],
    su: [SUStructure; 3],
    omega_big: Form,
    sp_basis: Vec<DMatrix<f64>>,
    sp_perp: Vec<DMatrix<f64>>,
}

/// Build the standard structure on H^n with interleaved (1, i, j, k) blocks.
pub fn build_hyper(n: usize) -> Result<HyperStructure> {
    if n < 1 || 2 * n > MAX_COMPLEX_DIM {
        return Err(Error::UnsupportedDimension {
            n,
            reason: format!("quaternionic dimension must lie in 1..={}", MAX_COMPLEX_DIM / 2),
        });
    }
    let mats = [
        block_diag(&left_block(0), n),
        block_diag(&left_block(1), n),
        block_diag(&left_block(2), n),
    ];
    let omegas = [omega_from_i(&mats[0]), omega_from_i(&mats[1]), omega_from_i(&mats[2])];
    let scale = volume_sign(n) / factorial(n);
    let mut su = Vec::with_capacity(3);
    for (axis, mat) in mats.iter().enumerate() {
        let (b, c) = cyclic(axis);
        let (re, im) = complex_wedge_power(&omegas[b], &omegas[c], n);
        su.push(SUStructure::adapt(mat, &re.scaled(scale), &im.scaled(scale))?);
    }
    let su: [SUStructure; 3] = match su.try_into() {
        Ok(arr) => arr,
        Err(_) => unreachable!(),
    };
    let mut omega_big = Form::zero(4 * n, 4);
    for w in &omegas {
        omega_big.add_scaled_assign(&w.wedge(w), 1.0);
    }
    let (sp_basis, sp_perp) = sp_split(&mats);
    let s = HyperStructure { n, mats, su, omega_big, sp_basis, sp_perp };
    s.validate()?;
    Ok(s)
}

impl HyperStructure {
    /// Quaternionic dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension 4n.
    pub fn dim(&self) -> usize {
        4 * self.n
    }

    /// Complex dimension 2n of each axis structure.
    pub fn su_n(&self) -> usize {
        2 * self.n
    }

    /// Complex structure matrix of an axis (0 = I, 1 = J, 2 = K).
    pub fn mat(&self, axis: usize) -> &DMatrix<f64> {
        &self.mats[axis]
    }

    /// Special unitary structure adapted to an axis.
    pub fn su(&self, axis: usize) -> &SUStructure {
        &self.su[axis]
    }

    /// Kahler form of an axis.
    pub fn omega(&self, axis: usize) -> &Form {
        self.su[axis].omega()
    }

    /// Fundamental four-form, the sum of the squared Kahler forms.
    pub fn omega_big(&self) -> &Form {
        &self.omega_big
    }

    /// Orthonormal basis of the quaternion-linear skew algebra.
    pub fn sp_basis(&self) -> &[DMatrix<f64>] {
        &self.sp_basis
    }

    /// Orthonormal basis of its orthogonal complement, the torsion fiber.
    pub fn sp_perp_basis(&self) -> &[DMatrix<f64>] {
        &self.sp_perp
    }

    /// Re-check every construction identity.
    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        let id = DMatrix::<f64>::identity(m, m);
        let [i, j, k] = &self.mats;
        let mut worst = 0.0f64;
        for a in &self.mats {
            worst = worst.max(mat_residual(&(a * a), &(-&id)));
            worst = worst.max(mat_residual(&a.transpose(), &(-a)));
        }
        worst = worst.max(mat_residual(&(i * j), k));
        worst = worst.max(mat_residual(&(j * i), &(-k)));
        worst = worst.max(mat_residual(&(j * k), i));
        worst = worst.max(mat_residual(&(k * i), j));
        if worst > 1e-12 {
            return Err(Error::invariant("quaternion identities", worst));
        }
        for su in &self.su {
            let r = su.max_residual();
            if r > 1e-8 {
                return Err(Error::invariant("axis structure identities", r));
            }
        }
        let scale = volume_sign(self.n) / factorial(self.n);
        let mut rebuild = 0.0f64;
        for axis in 0..3 {
            let (b, c) = cyclic(axis);
            let (re, im) = complex_wedge_power(self.omega(b), self.omega(c), self.n);
            rebuild = rebuild.max(re.scaled(scale).residual_to(self.su[axis].psi_plus()));
            rebuild = rebuild.max(im.scaled(scale).residual_to(self.su[axis].psi_minus()));
        }
        if rebuild > 1e-10 {
            return Err(Error::invariant("complex volume from the paired Kahler forms", rebuild));
        }
        let mut four = Form::zero(m, 4);
        for axis in 0..3 {
            four.add_scaled_assign(&self.omega(axis).wedge(self.omega(axis)), 1.0);
        }
        let r = four.residual_to(&self.omega_big);
        if r > 1e-12 {
            return Err(Error::invariant("fundamental four-form assembly", r));
        }
        Ok(())
    }
}

/// First-order quaternionic data: one skew block per direction, orthogonal to
/// the quaternion-linear algebra.
#[derive(Clone, Debug)]
pub struct HyperTorsionJet {
    structure: HyperStructure,
    zeta: Vec<DMatrix<f64>>,
}

/// Everything a quaternionic jet determines: the three induced axis jets,
/// their derivative packages, and the rate of the fundamental four-form.
/// Its exterior derivative is absent on R^4, where the four-form is already
/// top degree.
#[derive(Clone, Debug)]
pub struct HyperDerived {
    pub jets: [SUTorsionJet; 3],
    pub derived: [DerivedDerivatives; 3],
    pub nabla_omega_big: CoForm,
    pub d_omega_big: Option<Form>,
}

impl HyperTorsionJet {
    pub fn new(structure: HyperStructure, zeta: Vec<DMatrix<f64>>) -> Result<Self> {
        let m = structure.dim();
        if zeta.len() != m {
            return Err(Error::Schema(format!(
                "expected {m} torsion directions, got {}",
                zeta.len()
            )));
        }
        for z in &zeta {
            if z.nrows() != m || z.ncols() != m {
                return Err(Error::Schema(format!(
                    "torsion blocks must be {m}x{m}, got {}x{}",
                    z.nrows(),
                    z.ncols()
                )));
            }
        }
        let mut skew = 0.0f64;
        let mut inside = 0.0f64;
        for z in &zeta {
            let scale = z.norm().max(1.0);
            skew = skew.max((z + z.transpose()).norm() / scale);
            let tangent: f64 =
                structure.sp_basis().iter().map(|b| z.dot(b).powi(2)).sum::<f64>().sqrt();
            inside = inside.max(tangent / scale);
        }
        if skew > JET_TOL {
            return Err(Error::invariant("torsion blocks are skew", skew));
        }
        if inside > JET_TOL {
            return Err(Error::invariant(
                "torsion blocks avoid the quaternion-linear algebra",
                inside,
            ));
        }
        Ok(HyperTorsionJet { structure, zeta })
    }

    pub fn zero(structure: HyperStructure) -> Self {
        let m = structure.dim();
        let zeta = vec![DMatrix::zeros(m, m); m];
        HyperTorsionJet { structure, zeta }
    }

    /// Uniform coefficients over the torsion fiber basis in every direction.
    pub fn random(structure: HyperStructure, seed: u64) -> Self {
        let mut rng = XorShift64Star::new(seed);
        let m = structure.dim();
        let zeta = (0..m)
            .map(|_| {
                let mut z = DMatrix::zeros(m, m);
                for b in structure.sp_perp_basis() {
                    z += rng.uniform() * b;
                }
                z
            })
            .collect();
        HyperTorsionJet { structure, zeta }
    }

    pub fn structure(&self) -> &HyperStructure {
        &self.structure
    }

    pub fn zeta(&self) -> &[DMatrix<f64>] {
        &self.zeta
    }

    /// Axis jet induced by the quaternionic torsion: the one-form comes from
    /// the trace against the axis matrix, the skew part from the
    /// anticommuting half of each block.
    pub fn induced_su_jet(&self, axis: usize) -> Result<SUTorsionJet> {
        let s = &self.structure;
        let m = s.dim();
        let a_mat = s.mat(axis);
        let mut i_eta = Vec::with_capacity(m);
        let mut xi = Vec::with_capacity(m);
        for z in &self.zeta {
            i_eta.push((z.transpose() * a_mat).trace() / m as f64);
            xi.push(0.5 * (z + a_mat * z * a_mat));
        }
        let eta = Vector::from_coords(i_eta).apply(a_mat).scaled(-1.0);
        SUTorsionJet::new(s.su(axis).clone(), eta, xi)
    }

    /// Derive all three axis packages and the four-form rate.
    pub fn derive(&self) -> Result<HyperDerived> {
        let s = &self.structure;
        let m = s.dim();
        let jets =
            [self.induced_su_jet(0)?, self.induced_su_jet(1)?, self.induced_su_jet(2)?];
        let derived = [jets[0].derive(), jets[1].derive(), jets[2].derive()];
        let mut comps = Vec::with_capacity(m);
        for a in 0..m {
            let mut c = Form::zero(m, 4);
            for (axis, d) in derived.iter().enumerate() {
                c.add_scaled_assign(&s.omega(axis).wedge(d.nabla_omega.component(a)), 2.0);
            }
            comps.push(c);
        }
        let nabla_omega_big = CoForm::from_components(comps);
        let d_omega_big = if m > 4 { Some(nabla_omega_big.alternate()) } else { None };
        Ok(HyperDerived { jets, derived, nabla_omega_big, d_omega_big })
    }
}

/// Differentials of the two complex-volume halves of an axis from the
/// exterior derivatives of the other two Kahler forms: the (b, c) arguments
/// follow the cyclic successors of the axis.
pub fn dpsi_from_domegas(
    s: &HyperStructure,
    axis: usize,
    d_omega_b: &Form,
    d_omega_c: &Form,
) -> (Form, Form) {
    let n = s.n();
    let (b, c) = cyclic(axis);
    let (pr, pi) = complex_wedge_power(s.omega(b), s.omega(c), n - 1);
    let mut re = d_omega_b.wedge(&pr);
    re.add_scaled_assign(&d_omega_c.wedge(&pi), -1.0);
    let mut im = d_omega_b.wedge(&pi);
    im.add_scaled_assign(&d_omega_c.wedge(&pr), 1.0);
    let scale = volume_sign(n) / factorial(n - 1);
    (re.scaled(scale), im.scaled(scale))
}

/// A quaternionic jet recovered from the three Kahler form derivatives,
/// together with everything it re-derives.
#[derive(Clone, Debug)]
pub struct HyperRecovery {
    pub jet: HyperTorsionJet,
    pub derived: HyperDerived,
}

/// Rebuild the quaternionic torsion from (d omega_I, d omega_J, d omega_K)
/// alone.  Each axis first gets its complex-volume differentials from the
/// other two inputs, then its axis jet; the quaternionic blocks are half the
/// sum of the three anticommuting parts.  Inputs that no jet reproduces are
/// rejected with the worst residual.
pub fn hyper_recover(s: &HyperStructure, d_omegas: &[Form; 3]) -> Result<HyperRecovery> {
    let m = s.dim();
    let mut su_jets = Vec::with_capacity(3);
    for axis in 0..3 {
        let (b, c) = cyclic(axis);
        let (dpp, dpm) = dpsi_from_domegas(s, axis, &d_omegas[b], &d_omegas[c]);
        su_jets.push(full_recover(s.su(axis), &d_omegas[axis], &dpp, &dpm)?);
    }
    let zeta: Vec<DMatrix<f64>> = (0..m)
        .map(|a| 0.5 * (&su_jets[0].xi()[a] + &su_jets[1].xi()[a] + &su_jets[2].xi()[a]))
        .collect();
    let jet = HyperTorsionJet::new(s.clone(), zeta)?;
    let derived = jet.derive()?;
    let mut worst = 0.0f64;
    for axis in 0..3 {
        worst = worst.max(derived.derived[axis].d_omega.residual_to(&d_omegas[axis]));
        worst = worst.max(derived.jets[axis].eta().residual_to(su_jets[axis].eta()));
    }
    if worst > RECOVER_TOL {
        return Err(Error::inconsistent(
            "reconstructed quaternionic jet reproduces the Kahler form derivatives",
            worst,
        ));
    }
    Ok(HyperRecovery { jet, derived })
}

/// Lee forms of the three axes and the locally conformally Kahler checks.
#[derive(Clone, Debug)]
pub struct LckReport {
    pub theta: [Vector; 3],
    pub classes: [Vec<TorsionClass>; 3],
    pub lee_agreement: f64,
    pub eta_residuals: [f64; 3],
    pub invariant_residuals: [f64; 3],
}

impl LckReport {
    /// Conformally flat on every axis: only the coderivative classes are
    /// active, the Lee forms agree, and each one-form is the common Lee form
    /// scaled by -1/(2 complex dimension).
    pub fn is_lck(&self, tol: f64) -> bool {
        let exact = self
            .classes
            .iter()
            .all(|cs| cs.iter().all(|c| matches!(c, TorsionClass::W4 | TorsionClass::W5)));
        exact
            && self.lee_agreement < tol
            && self.eta_residuals.iter().all(|&r| r < tol)
            && self.invariant_residuals.iter().all(|&r| r < tol)
    }
}

/// Per-axis Lee forms with their agreement and conformal-flatness residuals.
pub fn lee_and_lck(derived: &HyperDerived) -> Result<LckReport> {
    let mut theta = Vec::with_capacity(3);
    let mut classes = Vec::with_capacity(3);
    let mut eta_residuals = [0.0f64; 3];
    let mut invariant_residuals = [0.0f64; 3];
    for axis in 0..3 {
        let jet = &derived.jets[axis];
        let s = jet.structure();
        let nn = s.n() as f64;
        let id_star = derived.derived[axis].dstar_omega.apply(s.i_mat());
        let th = id_star.scaled(-1.0 / (nn - 1.0));
        let report = report_from_jet(jet)?;
        classes.push(classify(&report, DEFAULT_CLASSIFY_THRESHOLD));
        eta_residuals[axis] = jet.eta().residual_to(&th.scaled(-1.0 / (2.0 * nn)));
        invariant_residuals[axis] =
            jet.eta().scaled(2.0 * nn * (nn - 1.0)).residual_to(&id_star);
        theta.push(th);
    }
    let theta: [Vector; 3] = match theta.try_into() {
        Ok(arr) => arr,
        Err(_) => unreachable!(),
    };
    let classes: [Vec<TorsionClass>; 3] = match classes.try_into() {
        Ok(arr) => arr,
        Err(_) => unreachable!(),
    };
    let mut lee_agreement = 0.0f64;
    for a in 0..3 {
        for b in (a + 1)..3 {
            lee_agreement = lee_agreement.max(theta[a].residual_to(&theta[b]));
        }
    }
    Ok(LckReport { theta, classes, lee_agreement, eta_residuals, invariant_residuals })
}

/// Rank audit for a coefficient-to-derivative map.
#[derive(Clone, Debug)]
pub struct KernelReport {
    pub domain_dim: usize,
    pub expected_rank: usize,
    pub rank: usize,
}

impl KernelReport {
    pub fn pass(&self) -> bool {
        self.rank == self.expected_rank
    }
}

/// Numeric rank of the linear map sending fiber coefficients per direction to
/// the stacked exterior derivatives of the listed two-forms.
fn rate_map_rank(m: usize, fiber: &[DMatrix<f64>], omegas: &[&Form]) -> (usize, usize) {
    let row_len = Form::zero(m, 3).coeffs().len();
    let domain = m * fiber.len();
    let mut mat = DMatrix::zeros(omegas.len() * row_len, domain);
    let mut col = 0;
    for dir in 0..m {
        let e_dir = Vector::basis(m, dir).one_form();
        for f in fiber {
            for (block, omega) in omegas.iter().enumerate() {
                let contrib = e_dir.wedge(&omega.lie_act(f).scaled(-1.0));
                for (r, &v) in contrib.coeffs().iter().enumerate() {
                    mat[(block * row_len + r, col)] = v;
                }
            }
            col += 1;
        }
    }
    let svd = mat.svd(false, false);
    let top = svd.singular_values.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let tol = 1e-9 * top.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&x| x > tol).count();
    (domain, rank)
}

/// The torsion-to-derivatives map has no kernel: a quaternionic jet whose
/// three Kahler forms are all closed is zero, so closed implies parallel.
pub fn hyperkahler_kernel_check(n: usize) -> Result<KernelReport> {
    let s = build_hyper(n)?;
    let omegas = [s.omega(0), s.omega(1), s.omega(2)];
    let (domain, rank) = rate_map_rank(s.dim(), s.sp_perp_basis(), &omegas);
    Ok(KernelReport { domain_dim: domain, expected_rank: domain, rank })
}
