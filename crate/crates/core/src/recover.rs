//! Reconstruction of torsion jets from exterior differentials.
//!
//! [`crate::torsion`] goes from a jet to the differentials of the structure
//! forms.  This module inverts that direction: from `d omega`, `d psi_plus`
//! and `d psi_minus` at a point it rebuilds the jet, splits it into the
//! irreducible parts, names the parts that are present, and rejects input
//! triples that cannot come from a single jet.  Dimensions `n <= 3` are
//! dispatched to [`crate::lowdim`], which has sharper closed forms.

use std::fmt;
use std::str::FromStr;

use crate::coform::CoForm;
use crate::error::{Error, Result};
use crate::form::{Form, Vector};
use crate::hermitian::{slot_apply, SlotOperatorKind};
use crate::lowdim;
use crate::rng::XorShift64Star;
use crate::structure::SUStructure;
use crate::torsion::{
    class_split, coderivative_part, jet_from_nabla_omega, psi_rate_plus, skew_part_from_parameter,
    PsiRateInverse, SUTorsionJet,
};

/// Relative residual above which recovered data is rejected: either two
/// independent routes to the same quantity disagree, or the reconstructed
/// jet fails to reproduce the input differentials.
pub const RECOVER_TOL: f64 = 1e-6;

/// Relative magnitude below which a part is reported as absent.
pub const DEFAULT_CLASSIFY_THRESHOLD: f64 = 1e-6;

/// Irreducible parts of the torsion, ordered with the one-form part last.
/// The signed refinements exist only for n = 3, where the top part splits
/// into two lines and the middle pair splits with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TorsionClass {
    W1,
    W1Plus,
    W1Minus,
    W2,
    W2Plus,
    W2Minus,
    W3,
    W4,
    W5,
}

impl TorsionClass {
    pub fn label(self) -> &'static str {
        match self {
            TorsionClass::W1 => "W1",
            TorsionClass::W1Plus => "W1+",
            TorsionClass::W1Minus => "W1-",
            TorsionClass::W2 => "W2",
            TorsionClass::W2Plus => "W2+",
            TorsionClass::W2Minus => "W2-",
            TorsionClass::W3 => "W3",
            TorsionClass::W4 => "W4",
            TorsionClass::W5 => "W5",
        }
    }

    /// The classes that can occur at complex dimension `n`.
    pub fn available(n: usize) -> &'static [TorsionClass] {
        match n {
            0 => &[],
            1 => &[TorsionClass::W5],
            2 => &[TorsionClass::W2, TorsionClass::W4, TorsionClass::W5],
            3 => &[
                TorsionClass::W1Plus,
                TorsionClass::W1Minus,
                TorsionClass::W2Plus,
                TorsionClass::W2Minus,
                TorsionClass::W3,
                TorsionClass::W4,
                TorsionClass::W5,
            ],
            _ => &[
                TorsionClass::W1,
                TorsionClass::W2,
                TorsionClass::W3,
                TorsionClass::W4,
                TorsionClass::W5,
            ],
        }
    }
}

impl fmt::Display for TorsionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TorsionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "W1" => Ok(TorsionClass::W1),
            "W1+" => Ok(TorsionClass::W1Plus),
            "W1-" => Ok(TorsionClass::W1Minus),
            "W2" => Ok(TorsionClass::W2),
            "W2+" => Ok(TorsionClass::W2Plus),
            "W2-" => Ok(TorsionClass::W2Minus),
            "W3" => Ok(TorsionClass::W3),
            "W4" => Ok(TorsionClass::W4),
            "W5" => Ok(TorsionClass::W5),
            _ => Err(Error::UnknownClass(s.to_string())),
        }
    }
}

/// Pointwise norms of the irreducible parts of a jet.  The four rate parts
/// are co-form norms; the one-form part is scaled so that it matches the
/// Frobenius norm of the corresponding connection block, `2 sqrt(n) |eta|`.
#[derive(Debug, Clone)]
pub struct Magnitudes {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    /// Signed refinement of the top part; n = 3 only.
    pub w1_pm: Option<(f64, f64)>,
    /// Signed refinement of the second part; n = 3 only.
    pub w2_pm: Option<(f64, f64)>,
}

impl Magnitudes {
    pub fn total(&self) -> f64 {
        (self.w1 * self.w1
            + self.w2 * self.w2
            + self.w3 * self.w3
            + self.w4 * self.w4
            + self.w5 * self.w5)
            .sqrt()
    }

    /// Magnitude of one class; signed variants fall back to zero when the
    /// refinement does not apply.
    pub fn of(&self, class: TorsionClass) -> f64 {
        match class {
            TorsionClass::W1 => self.w1,
            TorsionClass::W2 => self.w2,
            TorsionClass::W3 => self.w3,
            TorsionClass::W4 => self.w4,
            TorsionClass::W5 => self.w5,
            TorsionClass::W1Plus => self.w1_pm.map_or(0.0, |p| p.0),
            TorsionClass::W1Minus => self.w1_pm.map_or(0.0, |p| p.1),
            TorsionClass::W2Plus => self.w2_pm.map_or(0.0, |p| p.0),
            TorsionClass::W2Minus => self.w2_pm.map_or(0.0, |p| p.1),
        }
    }
}

/// Full pointwise analysis of a jet: the split of the Kähler-form rate,
/// the scalar or form parameters of the individual parts where they exist,
/// and the magnitude of every part.
#[derive(Debug, Clone)]
pub struct TorsionReport {
    pub jet: SUTorsionJet,
    /// Rate parts in class order (top, second, middle, coderivative);
    /// absent below n = 3 where the rate has fewer parts.
    pub parts: Option<[CoForm; 4]>,
    /// Parameter form of the top part, degree n - 3; n >= 4 only.
    pub w1_param: Option<Form>,
    /// Scalar parameters of the two top lines; n = 3 only.
    pub w1_scalars: Option<(f64, f64)>,
    /// Signed split of the second part; n = 3 only.
    pub w2_split: Option<(CoForm, CoForm)>,
    /// Expansion one-forms of the rate over the two volume parts; n = 2 only.
    pub xi_pm: Option<(Vector, Vector)>,
    /// The rotated coderivative one-form of the Kähler form.
    pub id_star_omega: Vector,
    pub magnitudes: Magnitudes,
}

/// One-form `I d* omega` computed from `d omega` alone, by double Hodge
/// duality: `*(*(d omega) ∧ omega)`.
pub fn i_dstar_omega(s: &SUStructure, d_omega: &Form) -> Vector {
    if s.n() == 1 {
        // The Kähler form is coclosed in the lowest dimension.
        return Vector::zeros(s.dim());
    }
    s.star(&s.star(d_omega).wedge(s.omega())).to_vector()
}

/// Magnitude assigned to the one-form part: the Frobenius norm of the
/// connection block it generates.
pub fn w5_magnitude(n: usize, eta: &Vector) -> f64 {
    2.0 * (n as f64).sqrt() * eta.norm()
}

/// Recovers the one-form part of the torsion from the differentials of the
/// volume parts (n >= 2).  Two independent pairings determine it:
///
/// * `*(*(d psi_+) ∧ psi_+ + *(d psi_-) ∧ psi_-) = n 2^(n-1) eta + 2^(n-2) I d* omega`
/// * `*(*(d psi_+) ∧ psi_- - *(d psi_-) ∧ psi_+) = n 2^(n-1) I eta - 2^(n-2) d* omega`
///
/// and the result is rejected if the two routes disagree.
pub fn recover_eta(
    s: &SUStructure,
    d_omega: &Form,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> Result<Vector> {
    let n = s.n();
    assert!(n >= 2, "the one-form recovery pairing needs n >= 2");
    let scale_eta = n as f64 * 2f64.powi(n as i32 - 1);
    let scale_i = 2f64.powi(n as i32 - 2);
    let id_star = i_dstar_omega(s, d_omega);

    let route_a = s
        .star(
            &(&s.star(d_psi_plus).wedge(s.psi_plus()) + &s.star(d_psi_minus).wedge(s.psi_minus())),
        )
        .to_vector();
    let eta = route_a.sub(&id_star.scaled(scale_i)).scaled(1.0 / scale_eta);

    let route_b = s
        .star(
            &(&s.star(d_psi_plus).wedge(s.psi_minus()) - &s.star(d_psi_minus).wedge(s.psi_plus())),
        )
        .to_vector();
    let dstar = id_star.apply(s.i_mat()).scaled(-1.0);
    let i_eta_b = route_b.add(&dstar.scaled(scale_i)).scaled(1.0 / scale_eta);
    let residual = eta.apply(s.i_mat()).residual_to(&i_eta_b);
    if residual > RECOVER_TOL {
        return Err(Error::inconsistent(
            "the two recovery routes for the torsion one-form",
            residual,
        ));
    }
    Ok(eta)
}

/// Coderivatives of the two volume parts, read off their differentials by
/// Hodge duality.  With `sigma = (-1)^(n(n+1)/2)`:
///
/// * n odd:  `d* psi_+ =  sigma * (d psi_-)`, `d* psi_- = -sigma * (d psi_+)`
/// * n even: `d* psi_+ = -sigma * (d psi_+)`, `d* psi_- = -sigma * (d psi_-)`
pub fn coderivatives_from_differentials(
    s: &SUStructure,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> (Form, Form) {
    let n = s.n();
    let sigma = if (n * (n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    if n % 2 == 1 {
        (
            s.star(d_psi_minus).scaled(sigma),
            s.star(d_psi_plus).scaled(-sigma),
        )
    } else {
        (
            s.star(d_psi_plus).scaled(-sigma),
            s.star(d_psi_minus).scaled(-sigma),
        )
    }
}

/// Projects a volume-part coderivative onto the block shared by the top and
/// second parts: `[(n-1)(n-2) a + 2 L a] / (4(n-2))` with `L` the pair-sum
/// rotation.  Kills the coderivative and one-form blocks (n >= 3).
pub fn dstar_low_pair(s: &SUStructure, a: &Form) -> Form {
    let n = s.n() as f64;
    assert!(s.n() >= 3, "the coderivative pair projection needs n >= 3");
    let l = slot_apply(SlotOperatorKind::PairSum, a, s.i_mat());
    let mut out = a.scaled((n - 1.0) * (n - 2.0));
    out.add_scaled_assign(&l, 2.0);
    out.scaled(1.0 / (4.0 * (n - 2.0)))
}

/// Parameter form of the top part, of degree n - 3, read off the
/// differential of `psi_plus` (n >= 4):
/// `b = -(1/12) I_total *(d psi_+ ∧ omega)`.
/// Only the top part survives the wedge with `omega`, so the formula is
/// insensitive to the other parts.
pub fn recover_w1_param(s: &SUStructure, d_psi_plus: &Form) -> Form {
    assert!(s.n() >= 4, "the parameter form exists for n >= 4");
    let inner = s.star(&d_psi_plus.wedge(s.omega()));
    slot_apply(SlotOperatorKind::Total, &inner, s.i_mat()).scaled(-1.0 / 12.0)
}

/// Middle block of `d omega`, after removing top and coderivative blocks:
/// `4 (d omega)_{3,4} = 3 d omega + L d omega` and
/// `(n-1) (d omega)_4 = -(I d* omega) ∧ omega`.
fn d_omega_middle(s: &SUStructure, d_omega: &Form, id_star: &Vector) -> Form {
    let n = s.n() as f64;
    let l = slot_apply(SlotOperatorKind::PairSum, d_omega, s.i_mat());
    let mut d34 = d_omega.scaled(3.0);
    d34.add_scaled_assign(&l, 1.0);
    let mut out = d34.scaled(0.25);
    out.add_scaled_assign(
        &id_star.one_form().wedge(s.omega()),
        1.0 / (n - 1.0),
    );
    out
}

/// Middle part of the Kähler-form rate, directly from `d omega` (n >= 3):
/// twice the rate part is the anti-invariant slice of the middle block,
/// re-slotted over directions.
pub fn recover_w3(s: &SUStructure, d_omega: &Form, id_star: &Vector) -> CoForm {
    assert!(s.n() >= 3, "the middle part exists for n >= 3");
    let d3 = d_omega_middle(s, d_omega, id_star);
    let co = CoForm::from_form(&d3);
    co.map(|c| {
        let mut v = c.clone();
        v.add_scaled_assign(&c.pullback(s.i_mat()), -1.0);
        v.scaled(0.5)
    })
}

/// Second part of the Kähler-form rate from the coderivatives of the volume
/// parts (n >= 4).  The combination
/// `C = sum_a e_a ⊗ (e_a ⌟ (d* psi_-)_{1,2}) ∧ omega
///         + e_a ⊗ (I e_a ⌟ (d* psi_+)_{1,2}) ∧ omega`
/// equals twice the second-part rate of `psi_+` minus four times its
/// top-part rate, and the middle, coderivative and one-form parts drop out.
pub fn recover_w2(
    s: &SUStructure,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
    w1_rate: &CoForm,
    inv: &PsiRateInverse,
) -> Result<CoForm> {
    assert!(s.n() >= 4, "the combination route needs n >= 4");
    let m = s.dim();
    let (c_plus, c_minus) = coderivatives_from_differentials(s, d_psi_plus, d_psi_minus);
    let a12 = dstar_low_pair(s, &c_plus);
    let b12 = dstar_low_pair(s, &c_minus);
    let mut comps = Vec::with_capacity(m);
    for a in 0..m {
        let e = Vector::basis(m, a);
        let ie = e.apply(s.i_mat());
        let mut c = b12.interior(&e).wedge(s.omega());
        c.add_scaled_assign(&a12.interior(&ie).wedge(s.omega()), 1.0);
        comps.push(c);
    }
    let combo = CoForm::from_components(comps);
    let mut image2 = combo.scaled(0.5);
    image2.add_scaled_assign(&psi_rate_plus(s, w1_rate), 2.0);
    inv.apply(&image2, RECOVER_TOL)
}

/// Rebuilds the jet from the three differentials and verifies that the
/// result reproduces them.  Input triples that cannot come from a single
/// jet are rejected.
pub fn full_recover(
    s: &SUStructure,
    d_omega: &Form,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> Result<SUTorsionJet> {
    let jet = match s.n() {
        0 => {
            return Err(Error::UnsupportedDimension {
                n: 0,
                reason: "empty structure".into(),
            })
        }
        1 => lowdim::recover_n1(s, d_psi_plus, d_psi_minus)?.0,
        2 => lowdim::recover_n2(s, d_omega, d_psi_plus, d_psi_minus)?.0,
        3 => lowdim::recover_n3(s, d_omega, d_psi_plus, d_psi_minus)?.0,
        _ => {
            let inv = PsiRateInverse::new(s);
            recover_generic(s, d_omega, d_psi_plus, d_psi_minus, &inv)?
        }
    };
    let derived = jet.derive();
    let residual = derived
        .d_omega
        .residual_to(d_omega)
        .max(derived.d_psi_plus.residual_to(d_psi_plus))
        .max(derived.d_psi_minus.residual_to(d_psi_minus));
    if residual > RECOVER_TOL {
        return Err(Error::inconsistent(
            "reconstructed jet reproduces the input differentials",
            residual,
        ));
    }
    Ok(jet)
}

/// Generic reconstruction for n >= 4 with a caller-provided inverse, so
/// sweeps over many inputs can share the factorization.
pub fn recover_generic(
    s: &SUStructure,
    d_omega: &Form,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
    inv: &PsiRateInverse,
) -> Result<SUTorsionJet> {
    let eta = recover_eta(s, d_omega, d_psi_plus, d_psi_minus)?;
    let id_star = i_dstar_omega(s, d_omega);
    let mu = id_star.apply(s.i_mat()).scaled(-1.0);
    let w4 = coderivative_part(s, &mu);
    let w1 = CoForm::from_form(&s.lambda_project(d_omega).scaled(1.0 / 3.0));
    let w3 = recover_w3(s, d_omega, &id_star);
    let w2 = recover_w2(s, d_psi_plus, d_psi_minus, &w1, inv)?;
    let mut rate = w1;
    rate.add_scaled_assign(&w2, 1.0);
    rate.add_scaled_assign(&w3, 1.0);
    rate.add_scaled_assign(&w4, 1.0);
    jet_from_nabla_omega(s.clone(), eta, &rate)
}

/// Analyzes a jet: splits the rate, extracts part parameters, and measures
/// every part.
pub fn report_from_jet(jet: &SUTorsionJet) -> Result<TorsionReport> {
    let s = jet.structure();
    let n = s.n();
    let derived = jet.derive();
    let id_star_omega = derived.dstar_omega.apply(s.i_mat());
    match n {
        1 => {
            let magnitudes = Magnitudes {
                w1: 0.0,
                w2: 0.0,
                w3: 0.0,
                w4: 0.0,
                w5: w5_magnitude(n, jet.eta()),
                w1_pm: None,
                w2_pm: None,
            };
            Ok(TorsionReport {
                jet: jet.clone(),
                parts: None,
                w1_param: None,
                w1_scalars: None,
                w2_split: None,
                xi_pm: None,
                id_star_omega,
                magnitudes,
            })
        }
        2 => {
            let (xi_plus, xi_minus) = lowdim::decompose_n2(jet);
            let i = s.i_mat();
            let a2 = xi_plus.add(&xi_minus.apply(i)).scaled(0.5);
            let b2 = xi_minus.sub(&xi_plus.apply(i)).scaled(0.5);
            let a4 = xi_plus.sub(&xi_minus.apply(i)).scaled(0.5);
            let b4 = xi_minus.add(&xi_plus.apply(i)).scaled(0.5);
            let w2_part = lowdim::rate_from_xi_pair(s, &a2, &b2);
            let w4_part = lowdim::rate_from_xi_pair(s, &a4, &b4);
            let magnitudes = Magnitudes {
                w1: 0.0,
                w2: w2_part.norm(),
                w3: 0.0,
                w4: w4_part.norm(),
                w5: w5_magnitude(n, jet.eta()),
                w1_pm: None,
                w2_pm: None,
            };
            Ok(TorsionReport {
                jet: jet.clone(),
                parts: None,
                w1_param: None,
                w1_scalars: None,
                w2_split: None,
                xi_pm: Some((xi_plus, xi_minus)),
                id_star_omega,
                magnitudes,
            })
        }
        _ => {
            let inv = PsiRateInverse::new(s);
            let parts = class_split(s, &jet.nabla_omega(), &inv)?;
            let mut w1_param = None;
            let mut w1_scalars = None;
            let mut w2_split = None;
            let mut w1_pm = None;
            let mut w2_pm = None;
            if n == 3 {
                let top = parts[0].alternate().scaled(1.0 / 3.0);
                let plus = top.inner(s.psi_plus()) / 4.0;
                let minus = top.inner(s.psi_minus()) / 4.0;
                w1_scalars = Some((plus, minus));
                let ff = 12f64.sqrt();
                w1_pm = Some((plus.abs() * ff, minus.abs() * ff));
                let (p, m_part) = lowdim::split_pm_n3(s, &parts[1]);
                w2_pm = Some((p.norm(), m_part.norm()));
                w2_split = Some((p, m_part));
            } else {
                let top_rate = psi_rate_plus(s, &parts[0]).alternate();
                w1_param = Some(recover_w1_param(s, &top_rate));
            }
            let magnitudes = Magnitudes {
                w1: parts[0].norm(),
                w2: parts[1].norm(),
                w3: parts[2].norm(),
                w4: parts[3].norm(),
                w5: w5_magnitude(n, jet.eta()),
                w1_pm,
                w2_pm,
            };
            Ok(TorsionReport {
                jet: jet.clone(),
                parts: Some(parts),
                w1_param,
                w1_scalars,
                w2_split,
                xi_pm: None,
                id_star_omega,
                magnitudes,
            })
        }
    }
}

/// Names the classes whose magnitude exceeds `threshold` times the total.
/// A jet with no torsion at all yields the empty list.
pub fn classify(report: &TorsionReport, threshold: f64) -> Vec<TorsionClass> {
    let total = report.magnitudes.total();
    if total < 1e-12 {
        return Vec::new();
    }
    TorsionClass::available(report.jet.structure().n())
        .iter()
        .copied()
        .filter(|&c| report.magnitudes.of(c) > threshold * total)
        .collect()
}

/// Builds a random jet whose torsion lies exactly in the requested classes.
/// Classes are deduplicated and processed in canonical order, so the result
/// depends only on the set and the seed.  The unsigned names `W1` and `W2`
/// are accepted at n = 3 and expand to both signed lines.
pub fn synthesize_jet(
    s: &SUStructure,
    classes: &[TorsionClass],
    seed: u64,
) -> Result<SUTorsionJet> {
    let n = s.n();
    let m = s.dim();
    let mut wanted = Vec::new();
    for &c in classes {
        match (n, c) {
            (3, TorsionClass::W1) => {
                wanted.push(TorsionClass::W1Plus);
                wanted.push(TorsionClass::W1Minus);
            }
            (3, TorsionClass::W2) => {
                wanted.push(TorsionClass::W2Plus);
                wanted.push(TorsionClass::W2Minus);
            }
            _ => {
                if !TorsionClass::available(n).contains(&c) {
                    return Err(Error::UnknownClass(format!(
                        "{c} cannot occur at n = {n}; available: {}",
                        TorsionClass::available(n)
                            .iter()
                            .map(|c| c.label())
                            .collect::<Vec<_>>()
                            .join(", ")
                    )));
                }
                wanted.push(c);
            }
        }
    }
    wanted.sort();
    wanted.dedup();

    let mut rng = XorShift64Star::new(seed);
    let mut eta = Vector::zeros(m);
    let mut rate = CoForm::zero(m, 2);
    let inv = if n >= 3
        && wanted.iter().any(|c| {
            matches!(
                c,
                TorsionClass::W2 | TorsionClass::W2Plus | TorsionClass::W2Minus | TorsionClass::W3
            )
        }) {
        Some(PsiRateInverse::new(s))
    } else {
        None
    };
    let split_of_random = |rng: &mut XorShift64Star, part: usize| -> Result<CoForm> {
        let raw = SUTorsionJet::random(s.clone(), rng.next_u64()).nabla_omega();
        let parts = class_split(s, &raw, inv.as_ref().expect("inverse prepared"))?;
        Ok(parts[part].clone())
    };
    for &c in &wanted {
        match c {
            TorsionClass::W5 => {
                eta = Vector::from_coords(rng.uniform_vec(m));
            }
            TorsionClass::W4 => {
                let mu = Vector::from_coords(rng.uniform_vec(m));
                rate.add_scaled_assign(&coderivative_part(s, &mu), 1.0);
            }
            TorsionClass::W3 => {
                rate.add_scaled_assign(&split_of_random(&mut rng, 2)?, 1.0);
            }
            TorsionClass::W1 => {
                let mut raw = Form::zero(m, 3);
                for v in raw.coeffs_mut() {
                    *v = rng.uniform();
                }
                rate.add_scaled_assign(&skew_part_from_parameter(&s.lambda_project(&raw)), 1.0);
            }
            TorsionClass::W1Plus => {
                rate.add_scaled_assign(&CoForm::from_form(s.psi_plus()), rng.uniform());
            }
            TorsionClass::W1Minus => {
                rate.add_scaled_assign(&CoForm::from_form(s.psi_minus()), rng.uniform());
            }
            TorsionClass::W2 if n == 2 => {
                let xi_plus = Vector::from_coords(rng.uniform_vec(m));
                let xi_minus = xi_plus.apply(s.i_mat()).scaled(-1.0);
                rate.add_scaled_assign(&lowdim::rate_from_xi_pair(s, &xi_plus, &xi_minus), 1.0);
            }
            TorsionClass::W2 => {
                rate.add_scaled_assign(&split_of_random(&mut rng, 1)?, 1.0);
            }
            TorsionClass::W2Plus => {
                let part = split_of_random(&mut rng, 1)?;
                rate.add_scaled_assign(&lowdim::split_pm_n3(s, &part).0, 1.0);
            }
            TorsionClass::W2Minus => {
                let part = split_of_random(&mut rng, 1)?;
                rate.add_scaled_assign(&lowdim::split_pm_n3(s, &part).1, 1.0);
            }
        }
    }
    jet_from_nabla_omega(s.clone(), eta, &rate)
}
