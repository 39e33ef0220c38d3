//! End-to-end acceptance suite. Each test covers one release criterion and
//! prints a PASS line on success (visible with `cargo test -- --nocapture`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ropebound::audit::{self, Status};
use ropebound::bounds;
use ropebound::oscillator::{self, OscillatorBank};
use ropebound::precision::{self, FloatFormat};
use ropebound::simulate;
use std::path::PathBuf;

fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/table1.json")
}

fn load_corpus() -> Vec<audit::ModelConfig> {
    let text = std::fs::read_to_string(corpus_path()).expect("corpus file");
    audit::parse_model_batch(&text)
        .expect("corpus parses")
        .into_iter()
        .map(|r| r.expect("every corpus row is valid"))
        .collect()
}

fn rel_err(computed: f64, reported: f64) -> f64 {
    (computed - reported).abs() / reported
}

/// Criterion 1: computed bound columns reproduce the published table of
/// eight model rows within 0.1% relative, statuses exactly.
#[test]
fn criterion_1_table_reproduction() {
    let configs = load_corpus();
    assert_eq!(configs.len(), 8);
    let reports = audit::audit_batch(&configs, 0.95).unwrap();

    // (aliasing, dc stability, status) per published row, top to bottom
    let expected = [
        (326.0, 36_197.0, Status::Unstable),
        (652.0, 72_394.0, Status::Unstable),
        (652.0, 72_394.0, Status::Unstable),
        (1304.0, 144_785.0, Status::Stable),
        (5215.0, 579_145.0, Status::Stable),
        (20_859.0, 3_170_586.0, Status::Unstable),
        (20_859.0, 3_195_319.0, Status::Stable),
        (166_894.0, 32_086_169.0, Status::Infeasible),
    ];
    for (report, (aliasing, dc, status)) in reports.iter().zip(expected) {
        let name = &report.config.name;
        assert!(
            rel_err(report.aliasing_bound, aliasing) < 1e-3,
            "{name}: aliasing {} vs {aliasing}",
            report.aliasing_bound
        );
        assert!(
            rel_err(report.dc_depth_bound, dc) < 1e-3,
            "{name}: dc {} vs {dc}",
            report.dc_depth_bound
        );
        // min base: DC term dominates in every published row
        assert_eq!(report.min_base, report.dc_depth_bound, "{name}");
        assert!(rel_err(report.min_base, dc) < 1e-3, "{name}");
        assert_eq!(report.max_base, 8_388_608.0, "{name}");
        assert_eq!(report.status, status, "{name}");
    }
    println!("criterion 1 (table reproduction): PASS");
}

/// Criterion 2: the aliasing scan at base 10,000 puts the first post-zero
/// maximum at 62,832 +/- 1 with value > 0.9999 and the minimum near 31,416
/// below -0.9999.
#[test]
fn criterion_2_aliasing_spike() {
    let curve = simulate::aliasing_scan(10_000.0, 80_000, 1).unwrap();
    let (pos, val) = simulate::locate_spike(&curve).unwrap();
    assert!((pos as i64 - 62_832).abs() <= 1, "spike at {pos}");
    assert!(val > 0.9999, "spike value {val}");
    let (min_pos, min_val) = curve
        .samples
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((min_pos as i64 - 31_416).abs() <= 1, "minimum at {min_pos}");
    assert!(min_val < -0.9999, "minimum value {min_val}");
    println!("criterion 2 (aliasing spike): PASS");
}

/// Criterion 3: coherence multipliers 2.22 / 3.15 (within 0.01) and the
/// high-fidelity band in [7.0, 10.1].
#[test]
fn criterion_3_coherence_multipliers() {
    assert!((bounds::coherence_multiplier(0.9).unwrap() - 2.22).abs() <= 0.01);
    assert!((bounds::coherence_multiplier(0.95).unwrap() - 3.15).abs() <= 0.01);
    for &eps in &[0.99, 0.992, 0.995] {
        let m = bounds::coherence_multiplier(eps).unwrap();
        assert!((7.0..=10.1).contains(&m), "eps {eps}: multiplier {m}");
    }
    println!("criterion 3 (coherence multipliers): PASS");
}

/// Criterion 4: exact precision walls, and the 1M-token / 96-layer target
/// has an empty region under FP32 regardless of base.
#[test]
fn criterion_4_precision_wall() {
    assert_eq!(
        bounds::precision_upper_bound(FloatFormat::FP32),
        8_388_608.0
    );
    assert_eq!(bounds::precision_upper_bound(FloatFormat::FP16), 1024.0);
    assert_eq!(bounds::precision_upper_bound(FloatFormat::BF16), 128.0);

    let params = bounds::StabilityParams::new(1_048_576, 0.95, 96).unwrap();
    let region = bounds::feasibility_region(&params, FloatFormat::FP32);
    assert!(!region.non_empty);
    // base-independent: no candidate base can sit inside an empty region
    for &base in &[1e4, 1e6, 8.3e6, 3.3e7] {
        assert!(!region.contains(base));
    }
    println!("criterion 4 (precision wall): PASS");
}

/// Independent rounding oracle: exact power-of-two scaling plus integer
/// round-ties-even, no shared code with the library's mask-and-round path.
fn oracle_round(x: f64, mantissa_bits: i32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut e = x.abs().log2().floor() as i32;
    while 2f64.powi(e) > x.abs() {
        e -= 1;
    }
    while 2f64.powi(e + 1) <= x.abs() {
        e += 1;
    }
    let scale = 2f64.powi(mantissa_bits - e);
    (x * scale).round_ties_even() / scale
}

fn oracle_distinguishable(p: f64, delta: f64, bits: i32) -> bool {
    let fp = oracle_round(p, bits);
    oracle_round(fp + delta, bits) != fp
}

/// Criterion 5: erasure onsets 2048 (FP32) and 1 (BF16) at base 10^4,
/// confirmed position-by-position against the independent oracle.
#[test]
fn criterion_5_erasure_oracle_equivalence() {
    assert_eq!(
        precision::erasure_onset(1e4, FloatFormat::FP32, 10_000).unwrap(),
        Some(2048)
    );
    assert_eq!(
        precision::erasure_onset(1e4, FloatFormat::BF16, 10_000).unwrap(),
        Some(1)
    );
    for format in [FloatFormat::FP32, FloatFormat::BF16] {
        let bits = format.mantissa_bits() as i32;
        let mut oracle_onset = None;
        for p in 0..=10_000u64 {
            let lib = precision::phase_step_distinguishable(p as f64, 1e-4, format);
            let oracle = oracle_distinguishable(p as f64, 1e-4, bits);
            assert_eq!(lib, oracle, "{format} disagrees with oracle at p={p}");
            if !oracle && oracle_onset.is_none() {
                oracle_onset = Some(p);
            }
        }
        assert_eq!(
            precision::erasure_onset(1e4, format, 10_000).unwrap(),
            oracle_onset,
            "{format}"
        );
    }
    println!("criterion 5 (erasure oracle equivalence): PASS");
}

/// Criterion 6: depth compounding closes exactly (cos(L/base)^N == eps at
/// base == depth bound) over 1,000 random draws, and the published
/// depth-collapse figure reproduces with the back-solved base.
#[test]
fn criterion_6_depth_compounding() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let l = rng.gen_range(1u64..=1_000_000);
        let eps = rng.gen_range(0.5..0.999);
        let n = rng.gen_range(1u32..=96);
        let params = bounds::StabilityParams::new(l, eps, n).unwrap();
        let base = bounds::depth_lower_bound(&params);
        let compounded = (l as f64 / base).cos().powi(n as i32);
        assert!(
            (compounded - eps).abs() / eps < 1e-6,
            "L={l} eps={eps} N={n}: {compounded}"
        );
    }

    // back-solve the base that puts the single-layer curve at 0.30 by 120k
    let base = 120_000.0 / 0.30f64.acos();
    assert!(rel_err(base, 94_686.0) < 2e-3, "back-solved base {base}");
    let curves = simulate::depth_decay_scan(base, &[1, 48], 120_000).unwrap();
    let n1_end = curves[0].samples.last().unwrap().1;
    assert!((n1_end - 0.30).abs() < 1e-6, "N=1 end value {n1_end}");
    let collapse = curves[1]
        .samples
        .iter()
        .find(|&&(_, v)| v < 0.05)
        .map(|&(p, _)| p)
        .expect("N=48 curve collapses");
    assert!(collapse < 50_000, "N=48 first below 0.05 at {collapse}");
    println!("criterion 6 (depth compounding): PASS");
}

/// Criterion 7: oscillator property suite over 100,000 randomized cases:
/// norm preservation, real/complex equivalence, dependence on position
/// difference only, and periodicity of rational-frequency banks.
#[test]
fn criterion_7_oscillator_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = 0usize;

    // norm preservation and complex equivalence, 25k vectors each
    for _ in 0..25_000 {
        let d = 2 * rng.gen_range(1usize..=32);
        let base = rng.gen_range(1.5..1e6);
        let bank = OscillatorBank::new(base, d).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let p = rng.gen_range(0u64..=10_000_000);
        let y = oscillator::rope_transform(&x, p, &bank).unwrap();

        let norm_in: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm_out: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm_out - norm_in).abs() <= 1e-10 * norm_in.max(1.0));
        cases += 1;

        let phasors = oscillator::phasor_vector(p, &bank).phasors;
        for (k, pair) in x.chunks_exact(2).enumerate() {
            let z = num_complex::Complex64::new(pair[0], pair[1]) * phasors[k];
            assert!((y[2 * k] - z.re).abs() <= 1e-12 * pair[0].abs().max(1.0) * 10.0);
            assert!((y[2 * k + 1] - z.im).abs() <= 1e-12 * pair[1].abs().max(1.0) * 10.0);
        }
        cases += 1;
    }

    // relative-position property: conjugate inner product depends on p - q only
    for _ in 0..25_000 {
        let d = 2 * rng.gen_range(1usize..=32);
        let base = rng.gen_range(1.5..1e6);
        let bank = OscillatorBank::new(base, d).unwrap();
        let diff = rng.gen_range(0u64..=100_000);
        let inner = |p: u64, q: u64| {
            let vp = oscillator::phasor_vector(p, &bank).phasors;
            let vq = oscillator::phasor_vector(q, &bank).phasors;
            vp.iter()
                .zip(&vq)
                .map(|(a, b)| a * b.conj())
                .sum::<num_complex::Complex64>()
                / d as f64
        };
        let q0 = rng.gen_range(0u64..=1_000_000);
        let reference = inner(q0 + diff, q0);
        let q1 = rng.gen_range(0u64..=1_000_000);
        let shifted = inner(q1 + diff, q1);
        assert!(
            (reference - shifted).norm() <= 1e-8,
            "diff {diff}: {reference} vs {shifted}"
        );
        cases += 1;
    }

    // Lemma-style periodicity on constructed rational-frequency banks
    while cases < 100_000 {
        let period = rng.gen_range(4u64..=4096);
        let channels = rng.gen_range(1usize..=8);
        // theta_k = 2*pi*m_k/T, strictly decreasing, all in (0, 1]
        let mut multiples: Vec<u64> = (0..channels)
            .map(|_| rng.gen_range(1..=period / 7 + 1))
            .collect();
        multiples.sort_unstable();
        multiples.dedup();
        multiples.reverse();
        let freqs: Vec<f64> = multiples
            .iter()
            .map(|&m| std::f64::consts::TAU * m as f64 / period as f64)
            .filter(|&t| t <= 1.0)
            .collect();
        if freqs.is_empty() {
            continue;
        }
        let bank = OscillatorBank::from_frequencies(freqs).unwrap();
        let p = rng.gen_range(0u64..=100_000);
        let vp = oscillator::phasor_vector(p, &bank).phasors;
        let vpt = oscillator::phasor_vector(p + period, &bank).phasors;
        for (a, b) in vp.iter().zip(&vpt) {
            assert!((a - b).norm() <= 1e-9, "T={period} p={p}: {a} vs {b}");
        }
        cases += 1;
    }

    assert!(cases >= 100_000, "only {cases} randomized cases");
    println!("criterion 7 (oscillator properties): PASS");
}

/// Criterion 8: every unstable corpus row with a non-empty region flips to
/// Stable when its effective base moves to the region midpoint.
#[test]
fn criterion_8_retrofit() {
    let configs = load_corpus();
    let reports = audit::audit_batch(&configs, 0.95).unwrap();
    let mut retrofitted = 0;
    for report in &reports {
        if report.status != Status::Unstable || report.min_base >= report.max_base {
            continue;
        }
        let mut config = report.config.clone();
        config.effective_base = Some((report.min_base + report.max_base) / 2.0);
        let fixed = audit::evaluate_model(&config, 0.95).unwrap();
        assert_eq!(fixed.status, Status::Stable, "{}", config.name);
        retrofitted += 1;
    }
    // the published table has four unstable rows, all with open regions
    assert_eq!(retrofitted, 4);
    println!("criterion 8 (retrofit): PASS");
}
