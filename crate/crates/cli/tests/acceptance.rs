//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use oculolipid::morphometry::metrics::{average_width, raster_average_width, raster_fractal_dimension};
use oculolipid::morphometry::*;
use oculolipid::pipeline::{
    default_lipid_names, lipid_retina_sweep, simulate_cohort, AnalysisConfig, PlantedEffect, PlantedEffectSpec,
};
use oculolipid::stats::{bh_fdr, fisher_ci, partial_correlation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn naive_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn fisher_triples() -> Check {
    let triples = [
        (-0.22, -0.25, -0.20),
        (-0.24, -0.26, -0.22),
        (-0.18, -0.20, -0.16),
        (0.11, 0.09, 0.13),
        (0.10, 0.08, 0.12),
    ];
    let mut worst: f64 = 0.0;
    for (r, lo, hi) in triples {
        let (a, b) = fisher_ci(r, 7068, 1, 0.95).map_err(|e| e.to_string())?;
        worst = worst.max((a - lo).abs()).max((b - hi).abs());
    }
    ensure(
        worst <= 0.01,
        format!("max bound error {worst:.4} over 5 triples (tolerance 0.01)"),
    )
}

fn residuals(y: &[f64], covs: &[&[f64]]) -> Vec<f64> {
    let n = y.len();
    let x = DMatrix::from_fn(n, covs.len() + 1, |i, j| if j == 0 { 1.0 } else { covs[j - 1][i] });
    let yv = DVector::from_column_slice(y);
    let beta = (x.transpose() * &x).try_inverse().expect("full rank") * x.transpose() * &yv;
    (yv - x * beta).iter().copied().collect()
}

fn partial_correlation_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst1: f64 = 0.0;
    for _ in 0..1000 {
        let z = normals(&mut rng, 50);
        let mut x = normals(&mut rng, 50);
        let mut y = normals(&mut rng, 50);
        let (a, b, c): (f64, f64, f64) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.0..1.0),
        );
        for i in 0..50 {
            x[i] += a * z[i];
            y[i] += b * z[i] + c * x[i];
        }
        let (rxy, rxz, ryz) = (naive_r(&x, &y), naive_r(&x, &z), naive_r(&y, &z));
        let expected = (rxy - rxz * ryz) / ((1.0 - rxz * rxz) * (1.0 - ryz * ryz)).sqrt();
        let got = partial_correlation(&x, &y, &[&z]).map_err(|e| e.to_string())?;
        worst1 = worst1.max((got.r - expected).abs());
    }
    let mut worst2: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(20..120);
        let z1 = normals(&mut rng, n);
        let z2: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let mut x = normals(&mut rng, n);
        let mut y = normals(&mut rng, n);
        for i in 0..n {
            x[i] = 50.0 + 8.0 * x[i] + 0.6 * z1[i] - z2[i];
            y[i] = y[i] - 0.4 * z1[i] + 0.5 * z2[i] + 0.2 * x[i];
        }
        let expected = naive_r(&residuals(&x, &[&z1, &z2]), &residuals(&y, &[&z1, &z2]));
        let got = partial_correlation(&x, &y, &[&z1, &z2]).map_err(|e| e.to_string())?;
        worst2 = worst2.max((got.r - expected).abs());
    }
    ensure(
        worst1 <= 1e-10 && worst2 <= 1e-9,
        format!("1 covariate max error {worst1:.2e} (1e-10), 2 covariates max error {worst2:.2e} (1e-9)"),
    )
}

fn naive_bh(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    p.iter()
        .map(|&pi| {
            p.iter()
                .filter(|&&pj| pj >= pi)
                .map(|&pj| {
                    let rank = p.iter().filter(|&&pk| pk <= pj).count();
                    m as f64 * pj / rank as f64
                })
                .fold(1.0f64, f64::min)
        })
        .collect()
}

fn bh_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut mismatches = 0;
    for case in 0..500 {
        let m = rng.random_range(1..=500);
        let mut p: Vec<f64> = (0..m).map(|_| rng.random::<f64>().powi(2)).collect();
        if case % 4 == 0 {
            p.iter_mut().for_each(|v| *v = (*v * 25.0).round() / 25.0);
        }
        let got = bh_fdr(&p, 0.05).map_err(|e| e.to_string())?;
        if got.p_adjusted != naive_bh(&p) {
            mismatches += 1;
        }
    }
    let a = bh_fdr(&[0.01, 0.02, 0.03, 0.04], 0.05)
        .map_err(|e| e.to_string())?
        .p_adjusted;
    let b = bh_fdr(&[0.005, 0.1, 0.8], 0.05).map_err(|e| e.to_string())?.p_adjusted;
    let close = |got: &[f64], want: &[f64]| got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-15);
    let hand = close(&a, &[0.04; 4]) && close(&b, &[0.015, 0.15, 0.8]);
    ensure(
        mismatches == 0 && hand,
        format!("{mismatches}/500 vectors differ from the quadratic oracle; hand cases {a:?} {b:?}"),
    )
}

fn null_spec(n: usize) -> PlantedEffectSpec {
    PlantedEffectSpec {
        n,
        planted: Vec::new(),
        ..PlantedEffectSpec::default()
    }
}

fn fdr_calibration() -> Check {
    let config = AnalysisConfig::default();
    let spec = null_spec(500);
    let mut fdp_sum = 0.0;
    let mut runs_with_rejections = 0;
    for seed in 1..=200u64 {
        let cohort = simulate_cohort(&spec, seed).map_err(|e| e.to_string())?;
        let sweep = lipid_retina_sweep(&cohort, None, &config).map_err(|e| e.to_string())?;
        if sweep.set.len() != 3366 {
            return Err(format!("seed {seed}: {} tests, expected 3366", sweep.set.len()));
        }
        // Nothing is planted, so every rejection is false.
        let rejections = sweep.set.significant_count();
        if rejections > 0 {
            runs_with_rejections += 1;
            fdp_sum += 1.0;
        }
    }
    let mean_fdp = fdp_sum / 200.0;
    ensure(
        mean_fdp <= 0.07,
        format!("mean FDP {mean_fdp:.3} over 200 null cohorts ({runs_with_rejections} with any rejection; limit 0.07)"),
    )
}

fn bresenham(r: &mut BitRaster, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64)) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
    let mut err = dx + dy;
    loop {
        r.set(x0 as usize, y0 as usize, true);
        if x0 == x1 && y0 == y1 {
            return;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

fn koch(iterations: u32, base: f64, margin: usize) -> BitRaster {
    let mut program = String::from("F");
    for _ in 0..iterations {
        program = program.replace('F', "F+F--F+F");
    }
    let step = base / 3f64.powi(iterations as i32);
    let height = (base * 3f64.sqrt() / 6.0).ceil() as usize + 2 * margin;
    let mut r = BitRaster::new(base as usize + 2 * margin + 1, height).unwrap();
    let (mut x, mut y, mut heading) = (margin as f64, (height - margin) as f64 - 1.0, 0.0f64);
    for c in program.chars() {
        match c {
            'F' => {
                let (nx, ny) = (x + step * heading.cos(), y - step * heading.sin());
                bresenham(
                    &mut r,
                    (x.round() as i64, y.round() as i64),
                    (nx.round() as i64, ny.round() as i64),
                );
                (x, y) = (nx, ny);
            }
            '+' => heading += PI / 3.0,
            _ => heading -= PI / 3.0,
        }
    }
    r
}

fn curve(f: impl Fn(f64) -> (f64, f64), t0: f64, t1: f64, n: usize) -> CenterlineSegment {
    let pts = (0..=n)
        .map(|i| {
            let (x, y) = f(t0 + (t1 - t0) * i as f64 / n as f64);
            Point::new(x, y)
        })
        .collect();
    CenterlineSegment::from_points(pts).unwrap()
}

fn morphometry_fixtures() -> Check {
    let divisor = MorphometryConfig::default().box_ladder_max_divisor;
    let fd = |r: &BitRaster| raster_fractal_dimension(r, divisor).map_err(|e| e.to_string());
    let line = fd(&BitRaster::from_fn(512, 512, |_, y| y == 200).unwrap())?;
    let square = fd(&BitRaster::from_fn(512, 512, |_, _| true).unwrap())?;
    let koch5 = fd(&koch(5, 729.0, 8))?;

    let straight = curve(|t| (t, 0.5 * t + 3.0), 0.0, 80.0, 80);
    let semi = curve(|t| (100.0 * t.cos(), 100.0 * t.sin()), 0.0, PI, 2000);
    let d_straight = distance_tortuosity(&straight).map_err(|e| e.to_string())?;
    let d_semi = distance_tortuosity(&semi).map_err(|e| e.to_string())?;

    let params = CurvatureParams::default();
    let radius = 50.0;
    let arc = curve(|t| (radius * t.cos(), radius * t.sin()), 0.0, PI / 2.0, 1000);
    let sc = squared_curvature_tortuosity(&arc, &params, HartNormalization::PerLength).map_err(|e| e.to_string())?;
    let sc_rel = (sc * radius * radius - 1.0).abs();
    let td_straight =
        tortuosity_density(&straight, &params, GrisanVariant::InflectionFraction).map_err(|e| e.to_string())?;
    let single_arc = curve(|t| (80.0 * t.cos(), 80.0 * t.sin()), 0.0, 2.0, 500);
    let td_arc =
        tortuosity_density(&single_arc, &params, GrisanVariant::InflectionFraction).map_err(|e| e.to_string())?;

    let ok = (line - 1.0).abs() <= 0.05
        && (square - 2.0).abs() <= 0.05
        && (koch5 - 1.2619).abs() <= 0.08
        && d_straight == 1.0
        && (d_semi - PI / 2.0).abs() <= 0.01
        && sc_rel <= 0.10
        && td_straight == 0.0
        && td_arc == 0.0;
    ensure(
        ok,
        format!(
            "FD line {line:.4}, square {square:.4}, Koch-5 {koch5:.4}; distance tortuosity straight {d_straight}, \
             semicircle {d_semi:.5}; arc squared curvature R^2*T = {:.4}; tortuosity density straight {td_straight}, \
             arc {td_arc}",
            sc * radius * radius
        ),
    )
}

fn width_fixture() -> Check {
    let bar = |len: usize, thick: usize| {
        let (w, h) = (len + 40, thick + 40);
        BitRaster::from_fn(w, h, |x, y| {
            (20..20 + len).contains(&x) && (20..20 + thick).contains(&y)
        })
        .unwrap()
    };
    let mut widths = Vec::new();
    for (len, thick) in [(100, 5), (200, 8)] {
        let raster = bar(len, thick);
        let direct = raster_average_width(&raster, 1.0).map_err(|e| e.to_string())?;
        let empty = BitRaster::new(raster.width(), raster.height()).unwrap();
        let mask = SegmentationMask::new("bar", Eye::Left, raster, empty).map_err(|e| e.to_string())?;
        let via_mask = average_width(&mask, VesselClass::Artery, 1.0).map_err(|e| e.to_string())?;
        if direct != via_mask {
            return Err(format!("{len}x{thick}: raster {direct} vs mask {via_mask}"));
        }
        widths.push((thick as f64, direct));
    }
    let ok = widths.iter().all(|(t, w)| (w - t).abs() <= 0.5);
    ensure(
        ok,
        format!(
            "100x5 bar width {:.3}, 200x8 bar width {:.3} (tolerance 0.5)",
            widths[0].1, widths[1].1
        ),
    )
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oculolipid"));
    c.env("OCULOLIPID_LOG", "error").env_remove("SOURCE_DATE_EPOCH");
    c
}

fn run_bin(args: &[&str]) -> Result<(), String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`{}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn end_to_end_recovery() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lipids: Vec<String> = default_lipid_names().into_iter().step_by(6).take(30).collect();
    let planted: Vec<PlantedEffect> = lipids
        .iter()
        .enumerate()
        .map(|(i, l)| PlantedEffect {
            fundus: "artery_average_width".into(),
            lipid: l.clone(),
            r: if i % 2 == 0 { 0.12 } else { -0.12 },
        })
        .collect();
    let spec = PlantedEffectSpec {
        n: 6000,
        planted: planted.clone(),
        ..PlantedEffectSpec::default()
    };
    if spec.fundus_age_r.is_empty() || spec.fundus_sex_shift.is_empty() || spec.lipid_age_effect == 0.0 {
        return Err("simulation spec lacks age/sex confounding".into());
    }
    let spec_path = dir.path().join("recovery.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let (o, s) = (out.to_str().unwrap(), spec_path.to_str().unwrap());
    run_bin(&["simulate", "--out", o, "--spec", s, "--seed", "6000"])?;
    run_bin(&["analyze", "--out", o])?;
    run_bin(&["report", "--out", o])?;

    let csv = std::fs::read_to_string(out.join("analysis/associations.csv")).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let mut found: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if &rec[0] == "artery_average_width" {
            found.insert(rec[1].to_string(), (rec[2].parse().unwrap(), rec[6].parse().unwrap()));
        }
    }
    let recovered = planted
        .iter()
        .filter(|p| {
            found
                .get(&p.lipid)
                .is_some_and(|&(r, q)| q < 0.05 && r.signum() == p.r.signum())
        })
        .count();

    let bars: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("figures/fig4_counts.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let top = bars["data"]["bars"][0]["feature"].as_str().unwrap_or("").to_string();
    let top_count = &bars["data"]["bars"][0]["count"];
    ensure(
        recovered >= 25 && top == "artery_average_width",
        format!("{recovered}/30 planted pairs significant with correct sign (need 25); top bar {top} ({top_count})"),
    )
}

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_bin(&["all", "--out", a.to_str().unwrap()])?;
    run_bin(&["all", "--out", b.to_str().unwrap(), "--jobs", "3"])?;
    let (fa, fb) = (files_under(&a), files_under(&b));
    let names: Vec<&String> = fa.keys().collect();
    if fa.keys().ne(fb.keys()) {
        return Err(format!(
            "file sets differ: {:?} vs {:?}",
            names,
            fb.keys().collect::<Vec<_>>()
        ));
    }
    let differing: Vec<&String> = fa.iter().filter(|(k, v)| fb[*k] != **v).map(|(k, _)| k).collect();
    let kinds = ["csv", "json", "svg"].map(|ext| fa.keys().filter(|k| k.ends_with(ext)).count());
    ensure(
        differing.is_empty() && kinds.iter().all(|&c| c > 0),
        format!(
            "{} files ({} csv, {} json, {} svg) compared; differing: {differing:?}",
            fa.len(),
            kinds[0],
            kinds[1],
            kinds[2]
        ),
    )
}

fn p_value_uniformity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut p = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let n = rng.random_range(20..80);
        let age: Vec<f64> = (0..n).map(|_| rng.random_range(40.0..70.0)).collect();
        let sex: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let x: Vec<f64> = (0..n)
            .map(|i| 0.05 * age[i] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let y: Vec<f64> = (0..n).map(|i| sex[i] + rng.sample::<f64, _>(StandardNormal)).collect();
        p.push(partial_correlation(&x, &y, &[&age, &sex]).map_err(|e| e.to_string())?.p);
    }
    p.sort_by(f64::total_cmp);
    let m = p.len() as f64;
    let d = p
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / m - v).max(v - i as f64 / m))
        .fold(0.0, f64::max);
    let critical = 1.6276 / m.sqrt();
    ensure(
        d < critical,
        format!("KS D = {d:.5}, critical value at alpha 0.01 = {critical:.5}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Fisher CI reproduces reported triples", fisher_triples),
        ("partial correlation matches oracles", partial_correlation_oracles),
        ("BH-FDR exactness", bh_exactness),
        ("FDR calibration on null cohorts", fdr_calibration),
        ("morphometry analytic fixtures", morphometry_fixtures),
        ("width fixture", width_fixture),
        ("end-to-end recovery", end_to_end_recovery),
        ("determinism of full runs", determinism),
        ("p-value uniformity", p_value_uniformity),
    ];
    let mut failed = 0;
    let stdout = std::io::stdout();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let mut out = stdout.lock();
        writeln!(out, "{tag} criterion {}: {name}: {detail} [{secs:.1}s]", i + 1).unwrap();
        out.flush().unwrap();
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
