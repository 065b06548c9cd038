//! Acceptance gate. Run with `cargo test --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mmtopo::demo::{disk_with_two_holes, gradient_with_rings, rect_hole_layout, DiskHoles};
use mmtopo::filtration::{verify_bifiltration_square, MorphFamily};
use mmtopo::image::{add_salt_noise, first_violation, serialize_image, threshold, ImageFormat};
use mmtopo::morphology::{close, dilate, erode, open};
use mmtopo::pipeline::{mm_diagram, pairwise_distances, pipeline_grayscale, sublevel_normalized, DivisorPolicy, PipelineConfig};
use mmtopo::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn five_step_fixture() -> Vec<BinaryImage> {
    ["00011\n01011\n00011\n11111\n11110", "00000\n01010\n00000\n01010\n00000", "00000\n01000\n00000\n00010\n00000", "00000\n00000\n00000\n00000\n00000"]
        .iter()
        .map(|s| BinaryImage::from_ascii(s).unwrap())
        .collect()
}

fn ac1_five_step() -> Outcome {
    let images = five_step_fixture();
    // Betti numbers of each stage
    let evolution: Vec<(usize, usize)> = images.iter().map(flood_betti).collect();
    ensure(evolution == [(2, 1), (1, 4), (1, 2), (1, 0)], || format!("fixture evolution {evolution:?}"))?;
    let grid = from_nested_sequence(&images, &[1, 2, 3, 4]).map_err(|e| e.to_string())?;
    let pd = compute_persistence(&build_complex(&grid)).map_err(|e| e.to_string())?;
    let inf = f64::INFINITY;
    ensure(pd.pairs(0) == [(1.0, 2.0), (1.0, inf)], || format!("PD0 = {:?}", pd.pairs(0)))?;
    ensure(pd.pairs(1) == [(1.0, 4.0), (2.0, 3.0), (2.0, 3.0), (2.0, 4.0)], || format!("PD1 = {:?}", pd.pairs(1)))?;
    Ok("PD0 {(1,2),(1,inf)}, PD1 {(1,4),(2,3)x2,(2,4)}".into())
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mmtopo")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("mmtopo {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(out.stdout)
}

fn ac2_rect_holes() -> Outcome {
    let widths = [7usize, 13, 21, 27];
    let (size, se_max) = (200usize, 28u32);
    // oracle: each hole alone, eroded level by level until its loop disappears
    let mut expected = Vec::new();
    for r in rect_hole_layout(size, &widths).map_err(|e| e.to_string())? {
        let mut bits = vec![0u8; size * size];
        for y in r.y..r.y + r.h {
            bits[y * size + r.x..y * size + r.x + r.w].fill(1);
        }
        let img = BinaryImage::new(size, size, bits).unwrap();
        let death = (2..=se_max)
            .find(|&k| betti_oracle(&erode(&img, &square_se(k).unwrap())).1 == 0)
            .map(|k| k - 1)
            .ok_or_else(|| format!("hole of width {} survives every element", r.w))?;
        expected.push((0.0, death as f64));
    }
    ensure(expected.windows(2).all(|w| w[0].1 < w[1].1), || format!("oracle deaths not increasing: {expected:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out_dir = dir.path().to_str().unwrap();
    run_cli(&["demo", "rect-holes", "--widths", "7,13,21,27", "--size", "200", "--se-max", "28", "--out-dir", out_dir])?;
    let pd = parse_pd(&fs::read_to_string(dir.path().join("pd.json")).unwrap()).map_err(|e| e.to_string())?;
    ensure(pd.pairs(1) == expected, || format!("PD1 {:?} vs oracle {expected:?}", pd.pairs(1)))?;
    let deaths: Vec<f64> = expected.iter().map(|p| p.1).collect();
    Ok(format!("PD1 deaths {deaths:?} match the erosion oracle"))
}

fn ac3_oracle_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grids = 600;
    let mut checks = 0;
    for g in 0..grids {
        let (w, h) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let levels = rng.gen_range(1..=6u32);
        // a pixel turns black at one level and stays black; some never do
        let times: Vec<Option<u32>> =
            (0..w * h).map(|_| rng.gen_range(0..=levels)).map(|t| (t > 0).then_some(t)).collect();
        let grid = EntryTimeGrid::new(w, h, times).map_err(|e| e.to_string())?;
        let complex = build_complex(&grid);
        let pd = compute_persistence(&complex).map_err(|e| e.to_string())?;
        for t in 0..=levels {
            let set = grid.level_set(t);
            let oracle = betti_oracle(&set);
            ensure(flood_betti(&set) == oracle, || format!("grid {g}: oracles disagree at t={t}"))?;
            let got = (betti_at(&pd, t as f64, 0), betti_at(&pd, t as f64, 1));
            ensure(got == oracle, || format!("grid {g} ({w}x{h}) t={t}: persistence {got:?}, oracle {oracle:?}"))?;
            checks += 1;
        }
    }
    Ok(format!("{grids} grids, {checks} level checks, no mismatch"))
}

fn ac4_bottleneck() -> Outcome {
    let inf_tol = 1e-12;
    let one = diagram(1, &[(0.0, 1.0)]);
    let d = bottleneck_distance(&one, &PersistenceDiagram::empty(), 1).map_err(|e| e.to_string())?;
    ensure((d - 0.5).abs() < inf_tol, || format!("d({{(0,1)}}, {{}}) = {d}"))?;
    let d = bottleneck_distance(&diagram(0, &[(0.0, 2.0)]), &diagram(0, &[(0.0, 4.0)]), 0).map_err(|e| e.to_string())?;
    ensure((d - 2.0).abs() < inf_tol, || format!("d({{(0,2)}}, {{(0,4)}}) = {d}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs = 400;
    for k in 0..pairs {
        let (a, b) = (random_points(&mut rng, 6), random_points(&mut rng, 6));
        let want = brute_bottleneck(&a, &b);
        let res = bottleneck(&diagram(1, &a), &diagram(1, &b), 1).map_err(|e| e.to_string())?;
        ensure((res.distance - want).abs() < inf_tol, || format!("pair {k}: {} vs brute force {want}\n{a:?}\n{b:?}", res.distance))?;
        let fast = bottleneck_distance(&diagram(1, &a), &diagram(1, &b), 1).unwrap();
        ensure(fast == res.distance, || format!("pair {k}: distance-only path gives {fast}"))?;
    }
    Ok(format!("2 fixed cases and {pairs} random pairs agree with enumeration"))
}

fn ac5_salt_noise() -> Outcome {
    let f = gradient_with_rings(200);
    let spec = FiltrationSpec::new(FiltrationKind::Opening, SeFamily::squares_up_to(11));
    let mut cfg = PipelineConfig::new(vec![50, 100, 150], spec);
    cfg.dims = vec![1];
    let clean = pipeline_grayscale(&f, &cfg).map_err(|e| e.to_string())?;
    let clean_sub = sublevel_normalized(&f, DivisorPolicy::Auto).map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for seed in 0..5u64 {
        let g = add_salt_noise(&f, 0.01, seed);
        let noisy = pipeline_grayscale(&g, &cfg).map_err(|e| e.to_string())?;
        let d = pairwise_distances(&clean, &noisy, 1).map_err(|e| e.to_string())?;
        let opening = d.iter().sum::<f64>() / d.len() as f64;
        let noisy_sub = sublevel_normalized(&g, DivisorPolicy::Auto).map_err(|e| e.to_string())?;
        let sub = bottleneck_distance(&clean_sub, &noisy_sub, 1).map_err(|e| e.to_string())?;
        ensure(opening < 0.5 * sub, || format!("seed {seed}: opening {opening:.4} vs sublevel {sub:.4}"))?;
        report.push(format!("{opening:.3}/{sub:.3}"));
    }
    Ok(format!("opening/sublevel per seed: {}", report.join(" ")))
}

fn random_se(rng: &mut impl Rng) -> StructuringElement {
    let mut offsets = vec![(0, 0)];
    for _ in 0..rng.gen_range(0..5) {
        offsets.push((rng.gen_range(-2..=2), rng.gen_range(-2..=2)));
    }
    offsets.sort_unstable();
    offsets.dedup();
    StructuringElement::new(offsets).unwrap()
}

fn grow_se(rng: &mut impl Rng, se: &StructuringElement) -> StructuringElement {
    let mut offsets = se.offsets().to_vec();
    for _ in 0..rng.gen_range(0..4) {
        offsets.push((rng.gen_range(-3..=3), rng.gen_range(-3..=3)));
    }
    offsets.sort_unstable();
    offsets.dedup();
    StructuringElement::new(offsets).unwrap()
}

fn leq<R: Raster>(a: &R, b: &R) -> bool {
    first_violation(a, b).unwrap().is_none()
}

fn ac6_morphology() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases = 300;
    for k in 0..cases {
        let f = random_gray(&mut rng, 14, 9);
        let b1 = random_se(&mut rng);
        let b2 = grow_se(&mut rng, &b1);
        let ctx = || format!("case {k}: B1 {b1}, B2 {b2}");
        // monotonicity in the element and the extensivity sandwich
        ensure(leq(&erode(&f, &b2), &erode(&f, &b1)), || format!("{}: erosion not antitone", ctx()))?;
        ensure(leq(&dilate(&f, &b1), &dilate(&f, &b2)), || format!("{}: dilation not monotone", ctx()))?;
        ensure(leq(&erode(&f, &b1), &f) && leq(&f, &dilate(&f, &b1)), || format!("{}: sandwich", ctx()))?;
        ensure(leq(&open(&f, &b1), &f) && leq(&f, &close(&f, &b1)), || format!("{}: open/close", ctx()))?;
        // order preservation: g = f with a few pixels raised
        let mut values = f.values().to_vec();
        for v in values.iter_mut() {
            if rng.gen_bool(0.3) {
                *v = rng.gen_range(*v..=9);
            }
        }
        let g = GrayscaleImage::new(f.width(), f.height(), 9, values).unwrap();
        for (name, op) in [("erode", erode::<GrayscaleImage> as fn(&_, &_) -> _), ("dilate", dilate), ("open", open), ("close", close)] {
            ensure(leq(&op(&f, &b1), &op(&g, &b1)), || format!("{}: {name} not order preserving", ctx()))?;
        }
        // nested chains for square elements on rectangular domains
        let bin = threshold(&f, rng.gen_range(0..=9));
        let n = rng.gen_range(2..=6);
        for kind in [FiltrationKind::Erosion, FiltrationKind::Dilation, FiltrationKind::Opening, FiltrationKind::Closing, FiltrationKind::CombinedErosionDilation, FiltrationKind::CombinedOpeningClosing] {
            mm_filtration(&bin, &FiltrationSpec::new(kind, SeFamily::squares_up_to(n)))
                .map_err(|e| format!("case {k}: {kind} with S_2..S_{n}: {e}"))?;
        }
        // threshold/element square
        let t1 = rng.gen_range(0..9);
        let t2 = rng.gen_range(t1 + 1..=9);
        let i = rng.gen_range(1..=5);
        let j = rng.gen_range(i..=6);
        let (s1, s2) = (square_se(i).unwrap(), square_se(j).unwrap());
        for family in [MorphFamily::Erosion, MorphFamily::Dilation, MorphFamily::Opening, MorphFamily::Closing] {
            let rep = verify_bifiltration_square(&f, t1, t2, &s1, &s2, family).map_err(|e| e.to_string())?;
            ensure(rep.all_hold(), || format!("case {k}: {family:?} square fails: {:?}", rep.arrows))?;
        }
    }
    Ok(format!("{cases} random image/element cases, no violation"))
}

fn ac7_locality() -> Outcome {
    let spec = FiltrationSpec::new(FiltrationKind::Dilation, SeFamily::squares_up_to(40));
    let lifespans = |which| -> Result<Vec<f64>, String> {
        let pd = mm_diagram(&disk_with_two_holes(which), &spec).map_err(|e| e.to_string())?;
        Ok(pd.in_dim(1).map(|i| i.lifespan()).collect())
    };
    let near = lifespans(DiskHoles::NearEdge)?;
    let inner = lifespans(DiskHoles::Interior)?;
    let both = lifespans(DiskHoles::Both)?;
    ensure(near.len() == 1 && inner.len() == 1, || format!("single-hole diagrams {near:?} {inner:?}"))?;
    let mut joint = vec![near[0], inner[0]];
    joint.sort_by(f64::total_cmp);
    let mut both_sorted = both.clone();
    both_sorted.sort_by(f64::total_cmp);
    ensure(both_sorted == joint, || format!("two-hole lifespans {both:?} differ from single holes {joint:?}"))?;
    ensure(near[0] < inner[0], || format!("near-edge lifespan {} not below interior {}", near[0], inner[0]))?;
    Ok(format!("lifespans: near edge {}, interior {}", near[0], inner[0]))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn cli_session(input: &Path, out: &Path) -> Result<(), String> {
    let i = |name: &str| input.join(name).display().to_string();
    let o = |name: &str| out.join(name).display().to_string();
    let mut stdout = Vec::new();
    let sessions: Vec<Vec<String>> = vec![
        vec!["demo".into(), "rect-holes".into(), "--widths".into(), "7,13,21,27".into(), "--out-dir".into(), o("demo")],
        vec!["noise".into(), "--in".into(), i("gray.pgm"), "--out".into(), o("noisy.pgm"), "--fraction".into(), "0.01".into(), "--seed".into(), "7".into()],
        vec!["morph".into(), "--op".into(), "open".into(), "--se".into(), "square:3".into(), "--in".into(), i("gray.pgm"), "--out".into(), o("opened.pgm")],
        vec!["morph".into(), "--op".into(), "dilate".into(), "--se".into(), "(0,0);(1,0);(0,-2)".into(), "--in".into(), i("gray.pgm"), "--out".into(), o("dilated.csv")],
        vec!["filtration".into(), "--kind".into(), "opening".into(), "--se-max".into(), "5".into(), "--threshold".into(), "100".into(), "--in".into(), i("gray.pgm"), "--out".into(), o("grid.csv")],
        vec!["filtration".into(), "--kind".into(), "sublevel".into(), "--in".into(), i("gray.pgm"), "--out".into(), o("sub.csv")],
        vec!["persistence".into(), "--grid".into(), o("grid.csv"), "--out".into(), o("pd.json")],
        vec!["persistence".into(), "--grid".into(), o("sub.csv"), "--out".into(), o("sub.json")],
        vec!["bottleneck".into(), "--a".into(), o("pd.json"), "--b".into(), o("demo/pd.json"), "--dim".into(), "1".into(), "--normalize".into(), "40".into()],
        vec!["pipeline".into(), "--in".into(), i("gray.pgm"), "--thresholds".into(), "50,100,150".into(), "--kind".into(), "opening".into(), "--se-max".into(), "6".into(), "--compare".into(), o("noisy.pgm"), "--out-dir".into(), o("pipeline")],
        vec!["plot".into(), "--kind".into(), "pd".into(), "--in".into(), o("sub.json"), "--out".into(), o("pd.svg")],
        vec!["plot".into(), "--kind".into(), "barcode".into(), "--in".into(), o("pd.json"), "--out".into(), o("barcode.svg")],
        vec!["plot".into(), "--kind".into(), "hist".into(), "--dim".into(), "1".into(), "--bin-width".into(), "2".into(), "--in".into(), o("sub.json"), "--out".into(), o("hist.svg")],
    ];
    for args in &sessions {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        stdout.extend(run_cli(&args)?);
    }
    fs::write(out.join("stdout.txt"), stdout).map_err(|e| e.to_string())
}

fn ac8_determinism() -> Outcome {
    let input = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gray = serialize_image(&gradient_with_rings(64), ImageFormat::PgmAscii).map_err(|e| e.to_string())?;
    fs::write(input.path().join("gray.pgm"), gray).map_err(|e| e.to_string())?;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cli_session(input.path(), a.path())?;
    cli_session(input.path(), b.path())?;
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    ensure(sa.keys().eq(sb.keys()), || "runs produced different file sets".into())?;
    for (name, bytes) in &sa {
        ensure(sb[name] == *bytes, || format!("{name} differs between runs"))?;
    }
    let svgs = sa.keys().filter(|k| k.ends_with(".svg")).count();
    Ok(format!("{} files ({svgs} SVGs) byte-identical across two runs", sa.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 golden five-by-five diagram", 1, ac1_five_step),
        ("2 rectangular hole widths", 30, ac2_rect_holes),
        ("3 oracle equivalence sweep", 60, ac3_oracle_sweep),
        ("4 bottleneck exactness", 30, ac4_bottleneck),
        ("5 salt-noise robustness", 120, ac5_salt_noise),
        ("6 morphology properties", 60, ac6_morphology),
        ("7 hole locality under dilation", 5, ac7_locality),
        ("8 CLI determinism", 600, ac8_determinism),
    ];
    let mut failed = Vec::new();
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed > Duration::from_secs(limit) {
                Err(format!("took {elapsed:.2?}, limit {limit}s ({msg})"))
            } else {
                Ok(msg)
            }
        });
        match outcome {
            Ok(msg) => println!("PASS  AC{name} [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                println!("FAIL  AC{name} [{elapsed:.2?}]: {msg}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
