//! Named identity checks over seeded random inputs.  Each check takes the
//! structure it exercises plus a seed and returns its worst relative
//! residual; `run_suite` fans seeds out (in parallel when the `parallel`
//! feature is on) and pairs every check with a pinned tolerance.

use crate::coform::CoForm;
use crate::error::Result;
use crate::form::{Form, Vector};
use crate::hermitian::{slot_apply, two_form_split, SlotOperatorKind};
use crate::hyper::{
    build_hyper, dpsi_from_domegas, hyper_recover, hyperkahler_kernel_check, lee_and_lck,
    HyperStructure, HyperTorsionJet,
};
use crate::lowdim::decompose_n2;
use crate::recover::{
    coderivatives_from_differentials, dstar_low_pair, full_recover, i_dstar_omega, recover_eta,
    report_from_jet, synthesize_jet, TorsionClass,
};
use crate::rng::XorShift64Star;
use crate::structure::{standard_structure, ConformalChange, SUStructure};
use crate::torsion::{
    class_split, direction_coupling, psi_rate_minus, psi_rate_plus, w4_psi_rate, PsiRateInverse,
    SUTorsionJet,
};

pub const TOL_STRUCTURE: f64 = 1e-10;
pub const TOL_RANKS: f64 = 1e-8;
pub const TOL_MODULE_LAWS: f64 = 1e-9;
pub const TOL_ROUND_TRIP: f64 = 1e-8;
pub const TOL_TABLE: f64 = 1e-9;
pub const TOL_CONFORMAL: f64 = 1e-10;
pub const TOL_HYPER: f64 = 1e-9;
pub const TOL_LCK: f64 = 1e-10;

/// One named check with its worst observed residual over all seeds.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub n: usize,
    pub seeds: usize,
    pub worst: f64,
    pub tol: f64,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        self.worst <= self.tol
    }
}

fn random_form(rng: &mut XorShift64Star, m: usize, p: usize) -> Form {
    let mut f = Form::zero(m, p);
    for c in f.coeffs_mut() {
        *c = rng.uniform();
    }
    f
}

fn vanish(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

/// Defining identities of the standard structure, re-run on fresh random
/// vectors and forms: wedge and contraction identities, the one-form star
/// identities, the pair-rotation eigenvalue on anti-invariant projections,
/// and the two-form split.
pub fn structure_identities(s: &SUStructure, seed: u64) -> f64 {
    let n = s.n();
    let m = s.dim();
    let mut rng = XorShift64Star::new(seed);
    let mut worst = s.max_residual();

    for _ in 0..4 {
        let x = Vector::from_coords(rng.uniform_vec(m));
        let y = Vector::from_coords(rng.uniform_vec(m));
        let ix = s.apply_i(&x);
        let lhs = x.one_form().wedge(s.psi_plus());
        worst = worst.max(lhs.residual_to(&ix.one_form().wedge(s.psi_minus())));
        worst = worst.max(s.psi_plus().interior(&x).residual_to(&s.psi_minus().interior(&ix)));
        if n >= 2 {
            let contracted = -&s.psi_plus().interior(&ix).wedge(s.omega());
            worst = worst.max(lhs.residual_to(&contracted));
            let biv = s.psi_plus().interior_bivector(&ix, &y);
            worst = worst.max(biv.residual_to(&s.psi_minus().interior_bivector(&x, &y).scaled(-1.0)));
            let scale = (1u64 << (n - 2)) as f64;
            let muf = x.one_form();
            let imu = ix.one_form();
            let spp = s.star(&s.star(&muf.wedge(s.psi_plus())).wedge(s.psi_plus()));
            worst = worst.max(spp.residual_to(&muf.scaled(-scale)));
            let spm = s.star(&s.star(&muf.wedge(s.psi_plus())).wedge(s.psi_minus()));
            worst = worst.max(spm.residual_to(&imu.scaled(-scale)));
        }
    }

    for p in 2..=n {
        let b = s.lambda_project(&random_form(&mut rng, m, p));
        let scale = b.norm();
        if scale < 1e-9 {
            continue;
        }
        let pair = slot_apply(SlotOperatorKind::PairSum, &b, s.i_mat());
        let eig = -((p * (p - 1) / 2) as f64);
        worst = worst.max(pair.residual_to(&b.scaled(eig)));
        let total = slot_apply(SlotOperatorKind::SlotSum, &b, s.i_mat());
        let single = slot_apply(SlotOperatorKind::SingleSlot(0), &b, s.i_mat());
        worst = worst.max(total.residual_to(&single.scaled(p as f64)));
    }

    if n >= 2 {
        let a = random_form(&mut rng, m, 2);
        if let Ok(split) = two_form_split(&a, s.i_mat(), s.omega()) {
            let mut back = split.su_part.clone();
            back.add_scaled_assign(s.omega(), split.omega_multiple);
            back.add_scaled_assign(&split.anti_invariant, 1.0);
            worst = worst.max(back.residual_to(&a));
            worst = worst.max(split.su_part.pullback(s.i_mat()).residual_to(&split.su_part));
            worst = worst
                .max(split.anti_invariant.pullback(s.i_mat()).residual_to(&-&split.anti_invariant));
        }
    }
    worst
}

/// Total ranks of the two volume-part maps over the full space of
/// anti-invariant rates, plus the kernel dimensions and, at n = 2, the
/// explicit kernel line.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub n: usize,
    pub fiber_dim: usize,
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub expected_rank: usize,
    pub kernel_residual: f64,
}

impl RankReport {
    pub fn pass(&self) -> bool {
        self.rank_plus == self.expected_rank
            && self.rank_minus == self.expected_rank
            && self.kernel_residual <= TOL_RANKS
    }
}

fn pointwise_rank(s: &SUStructure, plus: bool) -> (usize, usize) {
    let m = s.dim();
    let basis = crate::hermitian::lambda_basis(s.frame(), s.i_mat(), 2);
    let rows = Form::zero(m, s.n()).coeffs().len();
    let mut mat = nalgebra::DMatrix::<f64>::zeros(rows, basis.len());
    for (j, b) in basis.iter().enumerate() {
        let mut comps = vec![Form::zero(m, 2); m];
        comps[0] = b.clone();
        let co = CoForm::from_components(comps);
        let image =
            if plus { psi_rate_plus(s, &co) } else { psi_rate_minus(s, &co) };
        for (i, v) in image.component(0).coeffs().iter().enumerate() {
            mat[(i, j)] = *v;
        }
    }
    let svd = mat.svd(false, false);
    let top = svd.singular_values.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let rank = svd.singular_values.iter().filter(|&&x| x > 1e-10 * top.max(1.0)).count();
    (basis.len(), rank)
}

/// Ranks per direction scale with the number of directions; the expected
/// pointwise rank is n(n-1), so the total is 2n * n(n-1).
pub fn xi_rank_report(n: usize) -> Result<RankReport> {
    let s = standard_structure(n)?;
    let m = s.dim();
    let (fiber, rank_p) = pointwise_rank(&s, true);
    let (_, rank_m) = pointwise_rank(&s, false);
    let mut kernel_residual = 0.0f64;
    if n == 2 {
        // the pointwise kernel of the plus map is exactly the psi_minus line
        for a in 0..m {
            let mut comps = vec![Form::zero(m, 2); m];
            comps[a] = s.psi_minus().clone();
            let image = psi_rate_plus(&s, &CoForm::from_components(comps));
            kernel_residual =
                kernel_residual.max(vanish(image.norm(), s.psi_minus().norm()));
        }
    }
    // the closed form n(n-1) per direction holds from n = 3 on; at n = 2
    // each direction keeps one of its two fiber lines
    let expected_rank = if n == 2 { m * (fiber - 1) } else { m * n * (n - 1) };
    Ok(RankReport {
        n,
        fiber_dim: m * fiber,
        rank_plus: m * rank_p,
        rank_minus: m * rank_m,
        expected_rank,
        kernel_residual,
    })
}

/// Derivative package identities on a random jet: the coderivatives of the
/// volume parts from their differentials, the rotated coderivative of the
/// Kahler form, the one-form recovery, and the joint coderivative shape of
/// the last two parts on a jet carrying only those.
pub fn derivation_table(s: &SUStructure, seed: u64) -> Result<f64> {
    let n = s.n();
    let jet = SUTorsionJet::random(s.clone(), seed);
    let d = jet.derive();
    let mut worst = 0.0f64;

    let (cp, cm) = coderivatives_from_differentials(s, &d.d_psi_plus, &d.d_psi_minus);
    worst = worst.max(cp.residual_to(&d.dstar_psi_plus));
    worst = worst.max(cm.residual_to(&d.dstar_psi_minus));

    let id_star = i_dstar_omega(s, &d.d_omega);
    worst = worst.max(id_star.residual_to(&d.dstar_omega.apply(s.i_mat())));

    let eta = recover_eta(s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus)?;
    worst = worst.max(eta.residual_to(jet.eta()));

    // a jet carrying only the coderivative and one-form parts has
    // d psi_plus = -(n eta + Id*omega / 2) wedge psi_plus
    let tail = synthesize_jet(s, &[TorsionClass::W4, TorsionClass::W5], seed ^ 0x9E37)?;
    let td = tail.derive();
    let t_id_star = i_dstar_omega(s, &td.d_omega);
    let mut coeff = tail.eta().scaled(n as f64);
    coeff = coeff.add(&t_id_star.scaled(0.5));
    let rhs = -&coeff.one_form().wedge(s.psi_plus());
    worst = worst.max(td.d_psi_plus.residual_to(&rhs));
    Ok(worst)
}

/// Round trip through the derivative package: recover the jet from its three
/// differentials and compare the jet data and every per-class magnitude.
pub fn recovery_round_trip(s: &SUStructure, seed: u64) -> Result<f64> {
    let n = s.n();
    let mut worst = 0.0f64;
    let mut jets = vec![SUTorsionJet::random(s.clone(), seed)];
    if n >= 1 {
        jets.push(synthesize_jet(s, TorsionClass::available(n), seed ^ 0xABCD)?);
    }
    for jet in jets {
        let d = jet.derive();
        let rec = full_recover(s, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus)?;
        worst = worst.max(rec.eta().residual_to(jet.eta()));
        worst = worst.max(rec.nabla_omega().residual_to(&jet.nabla_omega()));
        let want = report_from_jet(&jet)?;
        let got = report_from_jet(&rec)?;
        let scale = want.magnitudes.total().max(1.0);
        for class in TorsionClass::available(n) {
            worst = worst
                .max((want.magnitudes.of(*class) - got.magnitudes.of(*class)).abs() / scale);
        }
    }
    Ok(worst)
}

/// Component laws of the four-part split: the parts repartition the rate,
/// the coupling operator has eigenvalue n-2 on the image of the first two
/// parts and -(n-2) on the rest, the third part's image alternates to zero,
/// and the last part's image is the closed-form shape of its coderivative.
pub fn component_split_laws(
    s: &SUStructure,
    inv: &PsiRateInverse,
    seed: u64,
) -> Result<f64> {
    let n = s.n();
    let jet = SUTorsionJet::random(s.clone(), seed);
    let rate = jet.nabla_omega();
    let parts = class_split(s, &rate, inv)?;
    let mut worst = 0.0f64;

    let mut back = parts[0].clone();
    for part in &parts[1..] {
        back.add_scaled_assign(part, 1.0);
    }
    worst = worst.max(back.residual_to(&rate));

    let mut low = parts[0].clone();
    low.add_scaled_assign(&parts[1], 1.0);
    let mut high = parts[2].clone();
    high.add_scaled_assign(&parts[3], 1.0);
    let eig = (n - 2) as f64;
    let img_low = psi_rate_plus(s, &low);
    worst = worst.max(direction_coupling(s, &img_low).residual_to(&img_low.scaled(eig)));
    let img_high = psi_rate_plus(s, &high);
    worst = worst.max(direction_coupling(s, &img_high).residual_to(&img_high.scaled(-eig)));

    let img3p = psi_rate_plus(s, &parts[2]);
    let img3m = psi_rate_minus(s, &parts[2]);
    worst = worst.max(vanish(img3p.alternate().norm(), img3p.norm()));
    worst = worst.max(vanish(img3m.alternate().norm(), img3m.norm()));

    let mu = parts[3].codifferential().to_vector();
    let shape = w4_psi_rate(s, &mu).scaled(-0.5 / (n as f64 - 1.0));
    worst = worst.max(psi_rate_plus(s, &parts[3]).residual_to(&shape));
    Ok(worst)
}

/// The ten-row table tying the plain and rotated coderivatives of the two
/// volume parts together, split by component, including the n-3 and n-1
/// rotation factors.
pub fn coderivative_pair_table(s: &SUStructure, seed: u64) -> Result<f64> {
    let n = s.n() as f64;
    let jet = SUTorsionJet::random(s.clone(), seed);
    let d = jet.derive();
    let eta = jet.eta();
    let mut worst = 0.0f64;

    let five_pp = s.psi_plus().interior(eta).scaled(n);
    let five_pm = s.psi_minus().interior(eta).scaled(n);

    // split each coderivative into pair part, coderivative part, one-form part
    let split = |a: &Form, five: &Form| -> (Form, Form) {
        let low = dstar_low_pair(s, a);
        let mut four = a.clone();
        four.add_scaled_assign(&low, -1.0);
        four.add_scaled_assign(five, -1.0);
        (low, four)
    };
    let (lp, fp) = split(&d.dstar_psi_plus, &five_pp);
    let (lm, fm) = split(&d.dstar_psi_minus, &five_pm);
    let (tlp, tfp) = split(&d.dstar_om_psi_plus, &five_pm);
    let mut neg_five_pp = five_pp.clone();
    neg_five_pp.scale_assign(-1.0);
    let (tlm, tfm) = split(&d.dstar_om_psi_minus, &neg_five_pp);

    worst = worst.max(lp.residual_to(&-&tlm));
    worst = worst.max(tlp.residual_to(&lm));
    worst = worst.max(fp.residual_to(&tfm));
    worst = worst.max(tfp.residual_to(&-&fm));

    let rot = |a: &Form| slot_apply(SlotOperatorKind::SlotSum, a, s.i_mat());
    worst = worst.max(rot(&lp).residual_to(&tlp.scaled(n - 3.0)));
    worst = worst.max(rot(&lm).residual_to(&tlm.scaled(n - 3.0)));
    worst = worst.max(rot(&tlp).residual_to(&lp.scaled(-(n - 3.0))));
    worst = worst.max(rot(&tlm).residual_to(&lm.scaled(-(n - 3.0))));
    worst = worst.max(rot(&fp).residual_to(&tfp.scaled(-(n - 1.0))));
    worst = worst.max(rot(&fm).residual_to(&tfm.scaled(-(n - 1.0))));
    worst = worst.max(rot(&tfp).residual_to(&fp.scaled(n - 1.0)));
    worst = worst.max(rot(&tfm).residual_to(&fm.scaled(n - 1.0)));
    Ok(worst)
}

/// Conformal transformation laws: the shifts of the one-form and of the
/// rotated coderivative, invariance of their weighted difference, and at
/// n = 2 the shifts of the two expansion one-forms.
pub fn conformal_invariance(s: &SUStructure, seed: u64) -> Result<f64> {
    let n = s.n() as f64;
    let m = s.dim();
    let mut rng = XorShift64Star::new(seed);
    let jet = SUTorsionJet::random(s.clone(), rng.next_u64());
    let df = Vector::from_coords(rng.uniform_vec(m));
    let moved = jet.conformal_transform(&ConformalChange { df: df.clone() })?;
    let mut worst = 0.0f64;

    worst = worst.max(moved.eta().residual_to(&jet.eta().sub(&df.scaled(1.0 / n))));

    let before = jet.derive();
    let after = moved.derive();
    let id_before = before.dstar_omega.apply(s.i_mat());
    let id_after = after.dstar_omega.apply(s.i_mat());
    worst = worst
        .max(id_after.residual_to(&id_before.sub(&df.scaled(2.0 * (n - 1.0)))));

    let weight = 2.0 * n * (n - 1.0);
    let inv_before = jet.eta().scaled(weight).sub(&id_before);
    let inv_after = moved.eta().scaled(weight).sub(&id_after);
    worst = worst.max(inv_after.residual_to(&inv_before));

    if s.n() == 2 {
        let (xp, xm) = decompose_n2(&jet);
        let (oxp, oxm) = decompose_n2(&moved);
        let shift_p = s.psi_minus().interior(&df).to_vector();
        let shift_m = s.psi_plus().interior(&df).to_vector();
        worst = worst.max(oxp.residual_to(&xp.sub(&shift_p)));
        worst = worst.max(oxm.residual_to(&xm.add(&shift_m)));
    }
    Ok(worst)
}

/// Cross-path equality for the quaternionic triple: each axis volume
/// differential from the other two Kahler derivatives, plus the recovery
/// round trip of the quaternionic blocks.
pub fn hyper_cross_path(h: &HyperStructure, seed: u64) -> Result<f64> {
    let jet = HyperTorsionJet::random(h.clone(), seed);
    let d = jet.derive()?;
    let mut worst = 0.0f64;
    for axis in 0..3 {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        let (dpp, dpm) =
            dpsi_from_domegas(h, axis, &d.derived[b].d_omega, &d.derived[c].d_omega);
        worst = worst.max(d.derived[axis].d_psi_plus.residual_to(&dpp));
        worst = worst.max(d.derived[axis].d_psi_minus.residual_to(&dpm));
    }
    let inputs = [
        d.derived[0].d_omega.clone(),
        d.derived[1].d_omega.clone(),
        d.derived[2].d_omega.clone(),
    ];
    let rec = hyper_recover(h, &inputs)?;
    for (z, w) in jet.zeta().iter().zip(rec.jet.zeta()) {
        let scale = z.norm().max(w.norm()).max(1.0);
        worst = worst.max((z - w).norm() / scale);
    }
    Ok(worst)
}

/// Conformal image of the flat quaternionic structure: every axis must
/// classify as coderivative-plus-one-form type with a common Lee form equal
/// to twice the differential, and each axis one-form must be the Lee form
/// scaled by -1/(2 complex dimension).
pub fn hyper_lck_construction(h: &HyperStructure, seed: u64) -> Result<f64> {
    let m = h.dim();
    let mut rng = XorShift64Star::new(seed);
    let df = Vector::from_coords(rng.uniform_vec(m));
    let change = ConformalChange { df: df.clone() };
    let confs: Vec<SUTorsionJet> = (0..3)
        .map(|axis| SUTorsionJet::zero(h.su(axis).clone()).conformal_transform(&change))
        .collect::<Result<_>>()?;
    let zeta: Vec<nalgebra::DMatrix<f64>> = (0..m)
        .map(|a| 0.5 * (&confs[0].xi()[a] + &confs[1].xi()[a] + &confs[2].xi()[a]))
        .collect();
    let jet = HyperTorsionJet::new(h.clone(), zeta)?;
    let derived = jet.derive()?;
    let report = lee_and_lck(&derived)?;
    let mut worst = report.lee_agreement;
    for axis in 0..3 {
        worst = worst.max(report.theta[axis].residual_to(&df.scaled(2.0)));
        worst = worst.max(report.eta_residuals[axis]);
        worst = worst.max(report.invariant_residuals[axis]);
        let only_tail = report.classes[axis]
            .iter()
            .all(|c| matches!(c, TorsionClass::W4 | TorsionClass::W5));
        if !only_tail || report.classes[axis].is_empty() {
            worst = worst.max(1.0);
        }
    }
    Ok(worst)
}

/// Worst residual over `count` consecutive seeds.  Fans out over a thread
/// pool when asked for and built with the `parallel` feature; the maximum
/// is order-independent, so both paths return identical values.
fn fold_seeds<F>(count: usize, parallel: bool, base: u64, f: F) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..count)
            .into_par_iter()
            .map(|i| f(base.wrapping_add(i as u64)))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)));
    }
    let _ = parallel;
    let mut worst = 0.0f64;
    for i in 0..count {
        worst = worst.max(f(base.wrapping_add(i as u64))?);
    }
    Ok(worst)
}

fn base_seed(name: &str, n: usize) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01B3);
    }
    h ^ (n as u64) << 48
}

/// Run every applicable check for each listed complex dimension.  Hyper
/// checks attach to the even dimensions 2 and 4 through their quaternionic
/// halves.  Every outcome carries its pinned tolerance; the caller decides
/// what failure means.
pub fn run_suite(n_list: &[usize], seeds: usize) -> Result<Vec<CheckOutcome>> {
    run_suite_mode(n_list, seeds, true)
}

/// [`run_suite`] with an explicit concurrency switch.  `parallel = false`
/// forces single-threaded seed folds even in builds with the thread pool,
/// which is what the benchmark compares against.
pub fn run_suite_mode(
    n_list: &[usize],
    seeds: usize,
    parallel: bool,
) -> Result<Vec<CheckOutcome>> {
    let seeds = seeds.max(1);
    let mut out = Vec::new();
    let mut push = |name: &str, n: usize, used: usize, worst: f64, tol: f64| {
        out.push(CheckOutcome { name: name.to_string(), n, seeds: used, worst, tol });
    };

    for &n in n_list {
        let s = standard_structure(n)?;

        let worst = fold_seeds(seeds, parallel, base_seed("structure", n), |seed| {
            Ok(structure_identities(&s, seed))
        })?;
        push("structure-identities", n, seeds, worst, TOL_STRUCTURE);

        if n >= 2 {
            let report = xi_rank_report(n)?;
            let worst = if report.rank_plus == report.expected_rank
                && report.rank_minus == report.expected_rank
            {
                report.kernel_residual
            } else {
                1.0
            };
            push("volume-map-ranks", n, 1, worst, TOL_RANKS);

            let worst = fold_seeds(seeds, parallel, base_seed("derivation", n), |seed| {
                derivation_table(&s, seed)
            })?;
            push("derivation-table", n, seeds, worst, TOL_TABLE);

            let worst = fold_seeds(seeds, parallel, base_seed("conformal", n), |seed| {
                conformal_invariance(&s, seed)
            })?;
            push("conformal-laws", n, seeds, worst, TOL_CONFORMAL);
        }

        let worst = fold_seeds(seeds, parallel, base_seed("round-trip", n), |seed| {
            recovery_round_trip(&s, seed)
        })?;
        push("recovery-round-trip", n, seeds, worst, TOL_ROUND_TRIP);

        if n >= 3 {
            let inv = PsiRateInverse::new(&s);
            let worst = fold_seeds(seeds, parallel, base_seed("split", n), |seed| {
                component_split_laws(&s, &inv, seed)
            })?;
            push("component-split-laws", n, seeds, worst, TOL_MODULE_LAWS);

            let worst = fold_seeds(seeds, parallel, base_seed("pair-table", n), |seed| {
                coderivative_pair_table(&s, seed)
            })?;
            push("coderivative-pair-table", n, seeds, worst, TOL_TABLE);
        }

        if n == 2 || n == 4 {
            let q = n / 2;
            let h = build_hyper(q)?;
            let worst = fold_seeds(seeds, parallel, base_seed("hyper-cross", n), |seed| {
                hyper_cross_path(&h, seed)
            })?;
            push("hyper-cross-path", n, seeds, worst, TOL_HYPER);

            let kernel = hyperkahler_kernel_check(q)?;
            push("hyper-kernel-rank", n, 1, if kernel.pass() { 0.0 } else { 1.0 }, 0.5);

            let worst = fold_seeds(seeds.min(8), parallel, base_seed("hyper-lck", n), |seed| {
                hyper_lck_construction(&h, seed)
            })?;
            push("hyper-lck", n, seeds.min(8), worst, TOL_LCK);
        }
    }
    Ok(out)
}
