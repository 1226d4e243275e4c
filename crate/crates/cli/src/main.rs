//! Command line surface: classify, synth, verify, conformal, hyper.
//!
//! Output is deterministic for fixed arguments: stable ordering, floats
//! printed with 12 significant digits.  Exit codes: 0 on success, 1 when a
//! verification check fails, 2 on input or usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use su_torsion::hyper::AXES;
use su_torsion::jet_doc::{document_from_su, load_jet, save_jet, to_json_string, LoadedJet};
use su_torsion::recover::{
    classify, report_from_jet, synthesize_jet, TorsionClass, TorsionReport,
    DEFAULT_CLASSIFY_THRESHOLD,
};
use su_torsion::structure::{standard_structure, ConformalChange};
use su_torsion::torsion::SUTorsionJet;
use su_torsion::verify::run_suite;
use su_torsion::{hyperkahler_kernel_check, lee_and_lck, Error, Result, Vector};

#[derive(Parser)]
#[command(name = "su-torsion", version, about = "Pointwise torsion analysis of special Hermitian and quaternionic structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the torsion carried by a jet document
    Classify {
        /// Path to a jet document
        jet: PathBuf,
        /// Magnitudes below this count as zero
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_THRESHOLD)]
        threshold: f64,
        /// Emit a machine-readable JSON report
        #[arg(long)]
        json: bool,
    },
    /// Synthesize a random jet carrying only the requested classes
    Synth {
        /// Complex dimension of the structure
        #[arg(long)]
        n: usize,
        /// Comma-separated class names, e.g. W1,W4
        #[arg(long, value_delimiter = ',')]
        classes: Vec<String>,
        /// Seed for the xorshift64* generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the jet document
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the identity suite and report one line per check
    Verify {
        /// Comma-separated complex dimensions to cover
        #[arg(long = "n-list", value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 4, 5])]
        n_list: Vec<usize>,
        /// Random draws per check
        #[arg(long, default_value_t = 10)]
        seeds: usize,
    },
    /// Conformally rescale a jet and report the invariant one-form
    Conformal {
        /// Path to a jet document of kind "su"
        jet: PathBuf,
        /// Differential of the conformal factor, comma-separated coordinates
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        df: Vec<f64>,
        /// Optional path for the transformed document
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Analyze a quaternionic jet axis by axis
    Hyper {
        /// Path to a jet document of kind "hyper"
        jet: PathBuf,
        /// Also verify the rank of the closedness system
        #[arg(long)]
        check_kernel: bool,
    },
}

/// 12 significant digits, the fixed formatting of every float we print.
fn sig(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Rounds to the printed precision so JSON and text reports agree.
fn round12(x: f64) -> f64 {
    sig(x).parse().expect("formatted float parses back")
}

fn vector_text(v: &Vector) -> String {
    let inner: Vec<String> = v.coords.iter().map(|&c| sig(c)).collect();
    format!("[{}]", inner.join(", "))
}

fn vector_json(v: &Vector) -> Value {
    Value::Array(v.coords.iter().map(|&c| json!(round12(c))).collect())
}

fn class_mask(classes: &[TorsionClass]) -> String {
    let labels: Vec<&str> = classes.iter().map(|c| c.label()).collect();
    format!("{{{}}}", labels.join(", "))
}

fn magnitude_rows(report: &TorsionReport) -> Vec<(String, f64)> {
    let m = &report.magnitudes;
    let mut rows = Vec::new();
    if let Some((p, mi)) = m.w1_pm {
        rows.push(("W1+".to_string(), p));
        rows.push(("W1-".to_string(), mi));
    } else {
        rows.push(("W1".to_string(), m.w1));
    }
    if let Some((p, mi)) = m.w2_pm {
        rows.push(("W2+".to_string(), p));
        rows.push(("W2-".to_string(), mi));
    } else {
        rows.push(("W2".to_string(), m.w2));
    }
    rows.push(("W3".to_string(), m.w3));
    rows.push(("W4".to_string(), m.w4));
    rows.push(("W5".to_string(), m.w5));
    rows.push(("total".to_string(), m.total()));
    rows
}

fn su_report_json(report: &TorsionReport, threshold: f64) -> Value {
    let classes: Vec<Value> = classify(report, threshold)
        .iter()
        .map(|c| json!(c.label()))
        .collect();
    let mut mags = Map::new();
    for (label, value) in magnitude_rows(report) {
        mags.insert(label, json!(round12(value)));
    }
    json!({
        "classes": classes,
        "magnitudes": Value::Object(mags),
        "eta": vector_json(report.jet.eta()),
        "i_dstar_omega": vector_json(&report.id_star_omega),
    })
}

fn print_su_report(report: &TorsionReport, threshold: f64, indent: &str) {
    let classes = classify(report, threshold);
    println!("{indent}classes: {}", class_mask(&classes));
    println!("{indent}magnitudes:");
    for (label, value) in magnitude_rows(report) {
        println!("{indent}  {label}: {}", sig(value));
    }
    println!("{indent}eta: {}", vector_text(report.jet.eta()));
    println!("{indent}I d* omega: {}", vector_text(&report.id_star_omega));
}

fn cmd_classify(path: &Path, threshold: f64, as_json: bool) -> Result<()> {
    let (doc, loaded) = load_jet(path)?;
    match &loaded {
        LoadedJet::Su(jet) | LoadedJet::Differentials { jet, .. } => {
            let report = report_from_jet(jet)?;
            if as_json {
                let mut value = su_report_json(&report, threshold);
                let obj = value.as_object_mut().expect("report is an object");
                obj.insert("kind".to_string(), json!("su"));
                obj.insert("n".to_string(), json!(doc.n));
                obj.insert("threshold".to_string(), json!(threshold));
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                println!("kind: su");
                println!("n: {}", doc.n);
                print_su_report(&report, threshold, "");
            }
        }
        LoadedJet::Hyper(jet) => {
            let derived = jet.derive()?;
            let lck = lee_and_lck(&derived)?;
            let su_n = jet.structure().su_n();
            if as_json {
                let mut axes = Vec::new();
                for (i, name) in AXES.iter().enumerate() {
                    let report = report_from_jet(&derived.jets[i])?;
                    let mut value = su_report_json(&report, threshold);
                    let obj = value.as_object_mut().expect("report is an object");
                    obj.insert("axis".to_string(), json!(name));
                    obj.insert("theta".to_string(), vector_json(&lck.theta[i]));
                    obj.insert(
                        "eta_lee_residual".to_string(),
                        json!(round12(lck.eta_residuals[i])),
                    );
                    axes.push(value);
                }
                let value = json!({
                    "kind": "hyper",
                    "n": doc.n,
                    "su_n": su_n,
                    "threshold": threshold,
                    "axes": axes,
                    "lee_agreement": round12(lck.lee_agreement),
                });
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                println!("kind: hyper");
                println!("n: {} (complex dimension {su_n})", doc.n);
                for (i, name) in AXES.iter().enumerate() {
                    let report = report_from_jet(&derived.jets[i])?;
                    println!("axis {name}:");
                    print_su_report(&report, threshold, "  ");
                    println!("  theta: {}", vector_text(&lck.theta[i]));
                    println!(
                        "  |eta + theta/(2n)|: {}",
                        sig(lck.eta_residuals[i])
                    );
                }
                println!("lee agreement: {}", sig(lck.lee_agreement));
            }
        }
    }
    Ok(())
}

fn cmd_synth(n: usize, classes: &[String], seed: u64, output: &Path) -> Result<()> {
    let parsed: Vec<TorsionClass> = classes
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| c.parse())
        .collect::<Result<_>>()?;
    let s = standard_structure(n)?;
    let jet = synthesize_jet(&s, &parsed, seed)?;
    let doc = document_from_su(&jet);
    save_jet(output, &doc)?;
    let mut labels: Vec<&str> = parsed.iter().map(|c| c.label()).collect();
    labels.sort();
    labels.dedup();
    println!(
        "wrote {} (n = {n}, seed = {seed}, classes {{{}}})",
        output.display(),
        labels.join(", ")
    );
    Ok(())
}

fn cmd_verify(n_list: &[usize], seeds: usize) -> Result<bool> {
    let outcomes = run_suite(n_list, seeds)?;
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut failures = 0usize;
    for o in &outcomes {
        println!(
            "{:width$}  n={}  seeds={:3}  worst={}  tol={:.0e}  {}",
            o.name,
            o.n,
            o.seeds,
            sig(o.worst),
            o.tol,
            if o.pass() { "pass" } else { "FAIL" },
        );
        if !o.pass() {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("{} checks passed", outcomes.len());
        Ok(true)
    } else {
        println!("{failures} of {} checks failed", outcomes.len());
        Ok(false)
    }
}

/// The conformally invariant one-form `2n(n-1) eta - I d* omega`.
fn invariant_one_form(jet: &SUTorsionJet) -> Vector {
    let s = jet.structure();
    let n = s.n() as f64;
    let id_star = jet.derive().dstar_omega.apply(s.i_mat());
    jet.eta().scaled(2.0 * n * (n - 1.0)).sub(&id_star)
}

fn cmd_conformal(path: &Path, df: &[f64], output: Option<&Path>) -> Result<()> {
    let (_, loaded) = load_jet(path)?;
    let jet = match &loaded {
        LoadedJet::Su(jet) | LoadedJet::Differentials { jet, .. } => jet,
        LoadedJet::Hyper(_) => {
            return Err(Error::Schema(
                "conformal expects a document of kind \"su\"".to_string(),
            ))
        }
    };
    let m = jet.structure().dim();
    if df.len() != m {
        return Err(Error::Schema(format!(
            "--df has {} coordinates, expected {m}",
            df.len()
        )));
    }
    let change = ConformalChange { df: Vector::from_coords(df.to_vec()) };
    let moved = jet.conformal_transform(&change)?;
    println!("invariant before: {}", vector_text(&invariant_one_form(jet)));
    println!("invariant after:  {}", vector_text(&invariant_one_form(&moved)));
    let doc = document_from_su(&moved);
    if let Some(out) = output {
        save_jet(out, &doc)?;
        println!("wrote {}", out.display());
    } else {
        print!("{}", to_json_string(&doc)?);
    }
    Ok(())
}

fn cmd_hyper(path: &Path, check_kernel: bool) -> Result<bool> {
    let (doc, loaded) = load_jet(path)?;
    let LoadedJet::Hyper(jet) = &loaded else {
        return Err(Error::Schema(
            "hyper expects a document of kind \"hyper\"".to_string(),
        ));
    };
    let derived = jet.derive()?;
    let lck = lee_and_lck(&derived)?;
    let su_n = jet.structure().su_n();
    println!("n: {} (complex dimension {su_n})", doc.n);
    for (i, name) in AXES.iter().enumerate() {
        let report = report_from_jet(&derived.jets[i])?;
        println!("axis {name}:");
        print_su_report(&report, DEFAULT_CLASSIFY_THRESHOLD, "  ");
        println!("  theta: {}", vector_text(&lck.theta[i]));
        println!("  |eta + theta/(2n)|: {}", sig(lck.eta_residuals[i]));
        println!(
            "  |2n(2n-1) eta - I d* omega|: {}",
            sig(lck.invariant_residuals[i])
        );
    }
    println!("lee agreement: {}", sig(lck.lee_agreement));
    let mut ok = true;
    if check_kernel {
        let kernel = hyperkahler_kernel_check(doc.n)?;
        println!(
            "closedness kernel: rank {} of {} (expected {}) {}",
            kernel.rank,
            kernel.domain_dim,
            kernel.expected_rank,
            if kernel.pass() { "pass" } else { "FAIL" },
        );
        ok = kernel.pass();
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Classify { jet, threshold, json } => {
            cmd_classify(&jet, threshold, json)?;
            Ok(true)
        }
        Command::Synth { n, classes, seed, output } => {
            cmd_synth(n, &classes, seed, &output)?;
            Ok(true)
        }
        Command::Verify { n_list, seeds } => cmd_verify(&n_list, seeds),
        Command::Conformal { jet, df, output } => {
            cmd_conformal(&jet, &df, output.as_deref())?;
            Ok(true)
        }
        Command::Hyper { jet, check_kernel } => cmd_hyper(&jet, check_kernel),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_formatting_is_stable() {
        assert_eq!(sig(0.0), "0.00000000000e0");
        assert_eq!(sig(-0.0), "0.00000000000e0");
        assert_eq!(sig(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(round12(1.0 / 3.0), 3.33333333333e-1);
    }
}
