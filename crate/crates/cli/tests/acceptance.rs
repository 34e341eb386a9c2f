//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Every criterion is checked against an oracle that does not share code
//! with the implementation under test: ground truth from the renderer, an
//! exact brute-force threshold search, closed-form quadratics, hand-computed
//! scores and all-pairs shortest paths.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand_distr::{Distribution, StandardNormal, Uniform};
use wheelprobe::config::parse_presets;
use wheelprobe::RunConfig;
use wheelprobe_core::probe::{
    fit_quadratic, run_pressure_sinkage, run_shear, slip_ratio, PressureSinkageProtocol,
    ShearProtocol,
};
use wheelprobe_core::seed;
use wheelprobe_core::traverse::{
    path_cost, plan_path, traversability_score, Cell, PlannerConfig, TerrainGrid,
    TraversabilityParams, TraverseError,
};
use wheelprobe_core::verification::run_verification;
use wheelprobe_core::vision::{
    estimate_contact, otsu_threshold, random_scene, render_scene, Background, ContactOptions,
    GrayImage,
};
use wheelprobe_core::{SoilPresetLibrary, WheelGeometry};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn presets() -> SoilPresetLibrary {
    RunConfig::default().presets().expect("built-in presets")
}

// 1 -------------------------------------------------------------------------

const VISION_SCENES: u64 = 60;

fn vision_accuracy() -> Outcome {
    let t0 = Instant::now();
    let mut within = 0;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut backgrounds = [0; 2];
    let mut envelope_ok = true;
    for i in 0..VISION_SCENES {
        let spec = random_scene(seed::derive(0xACCE_0001, i));
        envelope_ok &= (0.5..=1.5).contains(&spec.illumination_gain)
            && spec.viewpoint_tilt.abs() <= 15f64.to_radians();
        backgrounds[(spec.background == Background::Cluttered) as usize] += 1;
        let scene = render_scene(&spec).expect("scene in envelope renders");
        match estimate_contact(
            &scene.image,
            &scene.marker_corners,
            &spec.wheel,
            &ContactOptions::default(),
        ) {
            Ok(g) => {
                let e = (g.sinkage - spec.true_sinkage).abs() / spec.true_sinkage;
                worst = worst.max(e);
                within += (e <= 0.05) as usize;
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = t0.elapsed();
    let share = within as f64 / VISION_SCENES as f64;
    outcome(
        share >= 0.95 && elapsed < Duration::from_secs(60) && envelope_ok && backgrounds.iter().all(|&b| b > 0),
        format!(
            "{within}/{VISION_SCENES} within 5% ({failures} failed, worst {:.2}%, {} plain / {} cluttered) in {:.1} s",
            worst * 100.0,
            backgrounds[0],
            backgrounds[1],
            elapsed.as_secs_f64()
        ),
    )
}

// 2 -------------------------------------------------------------------------

/// Exhaustive search over thresholds with classes `≤ t` and `> t`, scoring
/// ω0·ω1·(μ0 − μ1)² as the exact fraction (S0·n1 − S1·n0)² / (n0·n1) (up
/// to the constant N²). Earliest maximiser wins.
fn brute_force_otsu(pixels: &[u8]) -> Option<u8> {
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..=255u8 {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for &p in pixels {
            if p <= t {
                n0 += 1;
                s0 += u128::from(p);
            } else {
                n1 += 1;
                s1 += u128::from(p);
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (d * d, n0 * n1);
        if best.map_or(true, |(_, bn, bd)| num * bd > bn * den) {
            best = Some((t, num, den));
        }
    }
    best.map(|b| b.0)
}

fn random_raster(seed_value: u64) -> Vec<u8> {
    let mut rng = seed::rng(seed_value);
    let u = Uniform::new(0.0f64, 1.0).unwrap();
    let draw = |rng: &mut _| u.sample(rng);
    let kind = (draw(&mut rng) * 4.0) as u32;
    let levels: Vec<u8> = (0..2 + (draw(&mut rng) * 4.0) as usize)
        .map(|_| (draw(&mut rng) * 256.0) as u8)
        .collect();
    let (m0, m1, sd) = (
        draw(&mut rng) * 255.0,
        draw(&mut rng) * 255.0,
        3.0 + draw(&mut rng) * 40.0,
    );
    (0..64 * 64)
        .map(|_| match kind {
            // Uniform noise.
            0 => (draw(&mut rng) * 256.0) as u8,
            // A few discrete levels: long runs of tied thresholds.
            1 => levels[(draw(&mut rng) * levels.len() as f64) as usize],
            // Two overlapping clusters.
            _ => {
                let m = if draw(&mut rng) < 0.5 { m0 } else { m1 };
                let z: f64 = StandardNormal.sample(&mut rng);
                (m + sd * z).round().clamp(0.0, 255.0) as u8
            }
        })
        .collect()
}

fn otsu_equivalence() -> Outcome {
    let t0 = Instant::now();
    let mut mismatches = 0;
    let mut checked = 0;
    for i in 0..1000 {
        let px = random_raster(seed::derive(0xACCE_0002, i));
        // A constant raster has no threshold; both sides must say so.
        let expected = brute_force_otsu(&px);
        let img = GrayImage::new(64, 64, px).unwrap();
        checked += 1;
        if otsu_threshold(&img).ok() != expected {
            mismatches += 1;
        }
    }
    let elapsed = t0.elapsed();
    outcome(
        mismatches == 0 && checked == 1000 && elapsed < Duration::from_secs(10),
        format!(
            "{checked} rasters, {mismatches} mismatches in {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

// 3 -------------------------------------------------------------------------

fn quadratic_recovery() -> Outcome {
    let u = Uniform::new(-5.0f64, 5.0).unwrap();
    let mut rng = seed::rng(0xACCE_0003);
    let mut worst_exact: f64 = 0.0;
    for _ in 0..100 {
        let (a, b, c) = (u.sample(&mut rng), u.sample(&mut rng), u.sample(&mut rng));
        let pts: Vec<(f64, f64)> = (0..11)
            .map(|k| {
                let x = 20.0 + 5.0 * k as f64;
                (x, a * x * x + b * x + c)
            })
            .collect();
        let f = fit_quadratic(&pts).unwrap();
        for (got, want) in [(f.a, a), (f.b, b), (f.c, c)] {
            worst_exact = worst_exact.max((got - want).abs() / want.abs());
        }
    }

    // y = 2x² + 3x + 1 on 11 points with σ = 0.01 noise.
    let (a, b, c) = (2.0, 3.0, 1.0);
    let (mut inside, mut total) = (0, 0);
    for s in 0..100 {
        let mut rng = seed::rng(seed::derive(0xACCE_0030, s));
        let pts: Vec<(f64, f64)> = (0..11)
            .map(|k| {
                let x = k as f64 / 10.0;
                let z: f64 = StandardNormal.sample(&mut rng);
                (x, a * x * x + b * x + c + 0.01 * z)
            })
            .collect();
        let f = fit_quadratic(&pts).unwrap();
        let se = f.std_errors.expect("11 points give standard errors");
        for ((got, want), se) in [(f.a, a), (f.b, b), (f.c, c)].into_iter().zip(se) {
            total += 1;
            inside += ((got - want).abs() <= 3.0 * se) as usize;
        }
    }
    let coverage = inside as f64 / total as f64;
    outcome(
        worst_exact <= 1e-9 && coverage >= 0.95,
        format!(
            "exact: worst relative error {worst_exact:.1e}; noisy: {inside}/{total} coefficients within 3 SE ({:.1}%)",
            coverage * 100.0
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn protocol_shape() -> Outcome {
    let lib = presets();
    let soil = lib.get("garnet").unwrap();
    let wheel = WheelGeometry::default();
    let p = run_pressure_sinkage(soil, &wheel, &PressureSinkageProtocol::default(), 1).unwrap();
    let s = run_shear(soil, &wheel, &ShearProtocol::default(), 1).unwrap();
    let loads: Vec<f64> = p.points.iter().map(|q| q.load).collect();
    let slips: Vec<f64> = s.points.iter().map(|q| q.slip).collect();
    let want_loads: Vec<f64> = (0..11).map(|k| 20.0 + 5.0 * k as f64).collect();
    let want_slips: Vec<f64> = (1..=8).map(|k| k as f64 / 10.0).collect();
    outcome(
        loads == want_loads && slips == want_slips,
        format!(
            "{} load setpoints {:?}..{:?}, {} slip setpoints",
            loads.len(),
            loads.first(),
            loads.last(),
            slips.len()
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn monotonic_physics() -> Outcome {
    let lib = presets();
    let wheel = WheelGeometry::default();
    let mut problems = Vec::new();
    let mut sweeps = Vec::new();
    for name in ["desert", "garnet", "quartz"] {
        let soil = lib.get(name).unwrap().noiseless();
        let p =
            run_pressure_sinkage(&soil, &wheel, &PressureSinkageProtocol::default(), 7).unwrap();
        let s = run_shear(&soil, &wheel, &ShearProtocol::default(), 7).unwrap();
        if !p
            .points
            .windows(2)
            .all(|w| w[1].mean_sinkage > w[0].mean_sinkage)
        {
            problems.push(format!("{name} sinkage not increasing"));
        }
        if !s
            .points
            .windows(2)
            .all(|w| w[1].mean_drawbar_pull > w[0].mean_drawbar_pull)
        {
            problems.push(format!("{name} drawbar pull not increasing"));
        }
        sweeps.push(p);
    }
    for k in 0..sweeps[0].points.len() {
        let z: Vec<f64> = sweeps.iter().map(|s| s.points[k].mean_sinkage).collect();
        if !(z[0] > z[1] && z[1] > z[2]) {
            problems.push(format!("ordering broken at {} N", sweeps[0].points[k].load));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "3 presets strictly monotone; desert > garnet > quartz at all 11 loads".into()
        } else {
            problems.join("; ")
        },
    )
}

// 6 -------------------------------------------------------------------------

fn verification_in_range() -> Outcome {
    let cfg = RunConfig::default();
    let vc = cfg.verification_config();
    let lib = presets();
    let wheel = cfg.robot.wheel;
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["quartz", "garnet", "desert"] {
        let soil = lib.get(name).unwrap();
        let passes = (1..=20)
            .filter(|&s| run_verification(soil, soil, &wheel, &vc, s).unwrap().pass)
            .count();
        let noiseless = soil.noiseless();
        let exact = run_verification(&noiseless, &noiseless, &wheel, &vc, 1).unwrap();
        pass &= passes >= 18 && exact.pass;
        parts.push(format!(
            "{name} {passes}/20{}",
            if exact.pass { "" } else { ", noiseless FAIL" }
        ));
    }
    let mismatch = run_verification(
        lib.get("garnet").unwrap(),
        lib.get("desert").unwrap(),
        &wheel,
        &vc,
        1,
    )
    .unwrap();
    pass &= !mismatch.pass;
    parts.push(format!(
        "garnet probe / desert drive {}",
        if mismatch.pass {
            "PASS (wrong)"
        } else {
            "FAIL (expected)"
        }
    ));
    outcome(pass, parts.join(", "))
}

// 7 -------------------------------------------------------------------------

fn traversability_formula() -> Outcome {
    let p = TraversabilityParams::from_limits(0.02, 0.6);
    let score = |d: f64, s: f64| traversability_score(d, s, &p).unwrap();
    let mut problems = Vec::new();
    let mut check = |what: &str, ok: bool| {
        if !ok {
            problems.push(what.to_owned());
        }
    };
    check("slip above limit", score(0.001, 0.6 * 1.01) == 0.0);
    check("sinkage above limit", score(0.0201, 0.01) == 0.0);
    check(
        "inside safety bounds",
        score(0.2 * 0.02 * 0.99, 0.2 * 0.6 * 0.99) == 1.0,
    );
    // Hand-computed middle branch values: 1 − 0.5·s/0.6 − 0.5·d/0.02.
    for (d, s, want) in [
        (0.008, 0.24, 0.6),
        (0.01, 0.3, 0.5),
        (0.016, 0.15, 0.475),
        (0.005, 0.45, 0.5),
    ] {
        check(&format!("T({d}, {s})"), (score(d, s) - want).abs() <= 1e-12);
    }
    let weighted = TraversabilityParams {
        w1: 0.3,
        w2: 0.7,
        ..p
    };
    // 1 − 0.3·0.5 − 0.7·0.25 = 0.675.
    check(
        "weighted",
        (traversability_score(0.005, 0.3, &weighted).unwrap() - 0.675).abs() <= 1e-12,
    );

    let n = 100;
    let d_of = |i: usize| 0.025 * i as f64 / (n - 1) as f64;
    let s_of = |j: usize| 0.75 * j as f64 / (n - 1) as f64;
    let t: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| score(d_of(i), s_of(j))).collect())
        .collect();
    let in_range = t.iter().flatten().all(|v| (0.0..=1.0).contains(v));
    let mono_d = (1..n).all(|i| (0..n).all(|j| t[i][j] <= t[i - 1][j]));
    let mono_s = (0..n).all(|i| (1..n).all(|j| t[i][j] <= t[i][j - 1]));
    check("range", in_range);
    check("non-increasing in sinkage", mono_d);
    check("non-increasing in slip", mono_s);
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "branches exact, middle branch within 1e-12, monotone on 100x100 grid".into()
        } else {
            problems.join("; ")
        },
    )
}

// 8 -------------------------------------------------------------------------

/// All-pairs shortest paths over the 8-connected cell graph, computed from
/// scratch: entering a cell with score T by a move of length ℓ costs
/// ℓ·cell_size·(1 + λ(1 − T)); T = 0 cells cannot be entered or left.
fn floyd_warshall(scores: &[f64], n: usize, cell_size: f64, lambda: f64) -> Vec<Vec<f64>> {
    let m = n * n;
    let mut d = vec![vec![f64::INFINITY; m]; m];
    for u in 0..m {
        if scores[u] == 0.0 {
            continue;
        }
        d[u][u] = 0.0;
        let (r, c) = ((u / n) as isize, (u % n) as isize);
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                let (rr, cc) = (r + dr, c + dc);
                if (dr, dc) == (0, 0) || rr < 0 || cc < 0 || rr >= n as isize || cc >= n as isize {
                    continue;
                }
                let v = rr as usize * n + cc as usize;
                if scores[v] == 0.0 {
                    continue;
                }
                let len = if dr != 0 && dc != 0 { 2f64.sqrt() } else { 1.0 };
                d[u][v] = len * cell_size * (1.0 + lambda * (1.0 - scores[v]));
            }
        }
    }
    for k in 0..m {
        for i in 0..m {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..m {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn planner_optimality() -> Outcome {
    let t0 = Instant::now();
    let n = 8;
    let cfg = PlannerConfig::default();
    let (mut optimal, mut infeasible_agree, mut bad) = (0, 0, Vec::new());
    for g in 0..200u64 {
        let mut rng = seed::rng(seed::derive(0xACCE_0008, g));
        let u = Uniform::new(0.0f64, 1.0).unwrap();
        let wall_rate = 0.1 + 0.45 * u.sample(&mut rng);
        let scores: Vec<f64> = (0..n * n)
            .map(|_| {
                if u.sample(&mut rng) < wall_rate {
                    0.0
                } else {
                    // Coarse levels make equal-cost alternatives common.
                    if u.sample(&mut rng) < 0.3 {
                        1.0
                    } else {
                        (u.sample(&mut rng) * 10.0).ceil() / 10.0
                    }
                }
            })
            .collect();
        let passable: Vec<usize> = (0..n * n).filter(|&i| scores[i] > 0.0).collect();
        if passable.len() < 2 {
            continue;
        }
        let pick = Uniform::new(0, passable.len()).unwrap();
        let (s, t) = (
            passable[pick.sample(&mut rng)],
            passable[pick.sample(&mut rng)],
        );
        let cell_size = 0.1;
        let grid = TerrainGrid::new(
            n,
            n,
            cell_size,
            scores.iter().map(|&v| Cell::scored(v)).collect(),
        )
        .unwrap();
        let oracle = floyd_warshall(&scores, n, cell_size, cfg.risk_weight)[s][t];
        match plan_path(&grid, (s / n, s % n), (t / n, t % n), &cfg) {
            Ok(path) => {
                let touches_blocked = path.cells.iter().any(|&c| grid.score(c) == Some(0.0));
                let recomputed = path_cost(&grid, &path.cells, &cfg);
                let ok = !touches_blocked
                    && (path.total_cost - oracle).abs() <= 1e-9 * oracle.max(1.0)
                    && recomputed.is_some_and(|c| (c - path.total_cost).abs() <= 1e-9)
                    && path.cells.first() == Some(&(s / n, s % n))
                    && path.cells.last() == Some(&(t / n, t % n));
                if ok {
                    optimal += 1;
                } else {
                    bad.push(format!(
                        "grid {g}: cost {} vs oracle {oracle}",
                        path.total_cost
                    ));
                }
            }
            Err(TraverseError::Infeasible { .. }) if oracle.is_infinite() => infeasible_agree += 1,
            Err(e) => bad.push(format!("grid {g}: {e} (oracle {oracle})")),
        }
    }
    let elapsed = t0.elapsed();
    outcome(
        bad.is_empty() && optimal + infeasible_agree == 200 && elapsed < Duration::from_secs(30),
        format!(
            "{optimal} optimal, {infeasible_agree} infeasible as expected, {} wrong in {:.2} s{}",
            bad.len(),
            elapsed.as_secs_f64(),
            bad.first()
                .map(|b| format!(" (first: {b})"))
                .unwrap_or_default()
        ),
    )
}

// 9 -------------------------------------------------------------------------

fn slip_formula() -> Outcome {
    let cases = [
        ("pure rolling", slip_ratio(0.1, 10.0, 1.0), 0.0),
        ("stuck", slip_ratio(0.1, 10.0, 0.0), 1.0),
        ("driving half", slip_ratio(0.1, 10.0, 0.5), 0.5),
        ("braking half", slip_ratio(0.1, 2.5, 0.5), 0.5),
    ];
    let mut wrong: Vec<String> = cases
        .iter()
        .filter(|(_, got, want)| got.as_ref().ok() != Some(want))
        .map(|(name, got, want)| format!("{name}: {got:?} != {want}"))
        .collect();
    if slip_ratio(0.1, 0.0, 0.0).is_ok() {
        wrong.push("rω = v = 0 accepted".into());
    }
    outcome(
        wrong.is_empty(),
        if wrong.is_empty() {
            "s = 0, 1 (stuck), 0.5 driving, 0.5 braking exact; undefined case rejected".into()
        } else {
            wrong.join("; ")
        },
    )
}

fn main() -> ExitCode {
    // The preset file is part of the artifact under test.
    parse_presets(wheelprobe::config::BUILTIN_PRESETS).expect("presets are valid and ordered");

    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("vision accuracy", vision_accuracy),
        ("otsu oracle equivalence", otsu_equivalence),
        ("quadratic fit recovery", quadratic_recovery),
        ("protocol shape", protocol_shape),
        ("monotonic physics", monotonic_physics),
        ("verification in range", verification_in_range),
        ("traversability formula", traversability_formula),
        ("planner optimality", planner_optimality),
        ("slip formula", slip_formula),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
