use maqd_bench::config::ExperimentConfig;
use maqd_bench::design::{run_design, training_records};
use maqd_bench::inspect::{boundary_table, inspect};
use maqd_bench::output::{csv_string, read_design, strip_columns};
use maqd_bench::sim::{
    run_fer, run_mi_track, simulate_point, with_workers, Decoder, FerRecord, MiRecord, FER_HEADER,
    MI_HEADER,
};
use maqd_bench::stats::bsc_capacity;
use maqd_bench::BenchError;
use maqd_core::channel::ChannelModel;
use maqd_core::design::DecoderDesign;
use statrs::function::erf::erfc;

const SMALL: &str = r#"
[code]
z = 4
rate = "2/3"

[decoder]
variant = "memory"
max_iter = 6

[design]
ebn0 = 3.5
frames = 200
inits = 5
seed = 11

[sweep]
ebn0 = [2.5, 3.5]
min_frame_errors = 50
max_frames = 512
batch = 64
seed = 5
"#;

fn small(extra: &str) -> ExperimentConfig {
    let mut text = SMALL.to_string();
    text.push_str(extra);
    ExperimentConfig::parse(&text).unwrap()
}

fn design(c: &ExperimentConfig) -> DecoderDesign {
    run_design(c, None).unwrap().design
}

#[test]
fn csv_headers_are_stable() {
    let fer = FerRecord {
        ebn0_db: 1.0,
        frames: 10,
        frame_errors: 1,
        bit_errors: 2,
        fer: 0.1,
        fer_lo: 0.0,
        fer_hi: 0.5,
        ber: 0.01,
        avg_iterations: 3.0,
        capped: true,
        wall_time_s: 0.5,
    };
    let text = csv_string(&[fer]).unwrap();
    assert_eq!(text.lines().next().unwrap(), FER_HEADER);
    assert_eq!(
        FER_HEADER,
        "ebn0_db,frames,frame_errors,bit_errors,fer,fer_lo,fer_hi,ber,avg_iterations,capped,wall_time_s"
    );
    let mi = MiRecord {
        iteration: 0,
        bit_errors: 0,
        bits: 1,
        ber: 0.0,
        mi: 1.0,
        mi_sd: 0.0,
    };
    assert_eq!(
        csv_string(&[mi]).unwrap().lines().next().unwrap(),
        MI_HEADER
    );
    assert_eq!(MI_HEADER, "iteration,bit_errors,bits,ber,mi,mi_sd");
}

#[test]
fn design_has_one_block_per_iteration_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.txt");
    let c = small("");
    let run = run_design(&c, Some(&path)).unwrap();
    assert_eq!(run.design.iterations.len(), 6);
    assert_eq!(read_design(&path).unwrap(), run.design);
    assert_eq!(training_records(&run.report).len(), 6);
    assert_eq!(run.attempts.len(), 1);
}

#[test]
fn pipeline_is_byte_identical_across_runs_and_worker_counts() {
    let c = small("");
    let outputs: Vec<(String, String)> = [1, 3, 1]
        .into_iter()
        .map(|w| {
            with_workers(Some(w), || {
                let d = design(&c);
                let dec = Decoder::quantized(&c.code.build().unwrap(), &d).unwrap();
                let fer = csv_string(&run_fer(&dec, &c.sweep).unwrap()).unwrap();
                (d.to_text(), strip_columns(&fer, &["wall_time_s"]))
            })
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert!(!outputs[0].1.contains("wall_time_s"));
}

#[test]
fn noiseless_transmission_has_no_frame_errors() {
    let c = small("");
    let code = c.code.build().unwrap();
    let mut sweep = c.sweep.clone();
    sweep.noiseless = true;
    sweep.max_frames = 300;
    for dec in [
        Decoder::quantized(&code, &design(&c)).unwrap(),
        Decoder::bp(&code, 6),
    ] {
        let r = simulate_point(&dec, 0.0, &sweep).unwrap();
        assert_eq!((r.frames, r.frame_errors, r.bit_errors), (300, 0, 0));
        assert!(r.capped);
        assert_eq!(r.fer_lo, 0.0);
    }
}

#[test]
fn fer_stops_at_the_frame_error_floor() {
    let c = small("");
    let dec = Decoder::bp(&c.code.build().unwrap(), 6);
    let mut sweep = c.sweep.clone();
    sweep.max_frames = 100_000;
    let r = simulate_point(&dec, 2.5, &sweep).unwrap();
    assert!(!r.capped);
    assert!(r.frame_errors >= 50 && r.frame_errors < 50 + 64);
    assert_eq!(r.frames % 64, 0);
    assert!(r.fer_lo < r.fer && r.fer < r.fer_hi);
    assert!((r.fer - r.frame_errors as f64 / r.frames as f64).abs() < 1e-15);
}

#[test]
fn design_for_another_code_is_refused() {
    let c = small("");
    let d = design(&c);
    let mut other = c.code.clone();
    other.z = 8;
    match Decoder::quantized(&other.build().unwrap(), &d) {
        Err(BenchError::Mismatch(_)) => {}
        r => panic!("expected a mismatch, got {r:?}"),
    }
}

#[test]
fn mi_tracking_starts_at_the_channel_hard_decision() {
    let c = small("");
    let code = c.code.build().unwrap();
    let dec = Decoder::quantized(&code, &design(&c)).unwrap();
    let ebn0 = 2.0;
    let mi = run_mi_track(&dec, ebn0, 2000, 9, false).unwrap();
    assert_eq!(mi.len(), 7);
    let ch = ChannelModel::from_ebn0(ebn0, code.rate()).unwrap();
    let p = 0.5 * erfc(1.0 / (ch.sigma() * std::f64::consts::SQRT_2));
    let expect = bsc_capacity(p);
    assert!(
        (mi[0].mi - expect).abs() < 4.0 * mi[0].mi_sd,
        "{} vs {expect}",
        mi[0].mi
    );
    // converging decoder: nondecreasing within the estimator noise
    for w in mi.windows(2) {
        assert!(
            w[1].mi + 3.0 * (w[0].mi_sd + w[1].mi_sd) >= w[0].mi,
            "{w:?}"
        );
    }
    let clean = run_mi_track(&dec, ebn0, 50, 9, true).unwrap();
    assert!(clean.iter().all(|r| r.mi == 1.0 && r.bit_errors == 0));
}

#[test]
fn inspect_reports_tables_and_boundaries() {
    let mut c = small("");
    c.decoder.variant = "conventional".into();
    let conv = design(&c);
    let text = inspect(&conv, Some(2));
    assert!(text.contains("singleton"));
    let table = boundary_table(&conv, Some(2));
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "iteration,region,b1");
    let used = conv.iterations.iter().filter(|it| it[2].used).count();
    assert!(used >= 5);
    assert_eq!(rows.len(), 1 + used);
    let mem = design(&small(""));
    assert!(inspect(&mem, None).contains("5 symbols, s in [-2, 2]"));
    assert_eq!(DecoderDesign::from_text(&mem.to_text()).unwrap(), mem);
}

#[test]
fn auto_design_finds_the_target_and_reports_failure() {
    let mut c = small("");
    c.design.ebn0 = None;
    c.design.target_mi = 0.99;
    c.design.search = [1.0, 6.0];
    c.design.tolerance = 0.5;
    let run = run_design(&c, None).unwrap();
    let ok: Vec<f64> = run
        .attempts
        .iter()
        .filter(|a| a.1 >= 0.99)
        .map(|a| a.0)
        .collect();
    let chosen = run.design.header.design_ebn0;
    assert_eq!(chosen, ok.iter().copied().fold(f64::INFINITY, f64::min));
    if chosen > 1.0 {
        // the step below the chosen point failed the target
        let below = run
            .attempts
            .iter()
            .filter(|a| a.0 < chosen)
            .map(|a| a.0)
            .fold(f64::MIN, f64::max);
        assert!(chosen - below <= 0.5 + 1e-12);
    }
    c.design.search = [0.0, 0.5];
    assert!(matches!(run_design(&c, None), Err(BenchError::Search(_))));
}
