use ordnoise::bindesign::enumerate_schemes;
use ordnoise::bounds::{bound_curve, exact_confusion, Method};
use ordnoise::calibrate::{estimate_variability, synth_rmse_curve};
use ordnoise::io::{read_survey, write_curve, write_survey};
use ordnoise::metrics::confusion;
use ordnoise::noise::{apply_noise, generate_synth};
use ordnoise::shares::nps;
use ordnoise::{BinningScheme, NoiseModel, RngSpec};

#[test]
fn enumerated_schemes_round_trip_through_text() {
    for k in [2, 3] {
        for s in enumerate_schemes(k).unwrap() {
            let text = s.to_string();
            assert_eq!(text.parse::<BinningScheme>().unwrap(), s, "{text}");
        }
    }
}

#[test]
fn simulated_population_matches_exact_enumeration() {
    let scheme = BinningScheme::brand();
    let clean = generate_synth(200_000, &RngSpec::new(1)).unwrap();
    for v in [1u8, 4] {
        let noisy = apply_noise(&clean, NoiseModel::new(v).unwrap(), &RngSpec::new(10 + v as u64)).unwrap();
        let truth: Vec<_> = noisy
            .records()
            .iter()
            .map(|r| scheme.categorize(r.unbiased_score.unwrap()))
            .collect();
        let seen: Vec<_> = noisy
            .records()
            .iter()
            .map(|r| scheme.categorize(r.biased_score))
            .collect();
        let sim = confusion(&truth, &seen, 3).unwrap();
        let exact = exact_confusion(&scheme, v, false).unwrap();
        assert!((sim.accuracy() - exact.accuracy()).abs() < 0.005, "v={v}");
        let drift = nps(&sim.observed_shares()).unwrap() - nps(&exact.observed_shares()).unwrap();
        assert!(drift.abs() < 0.6, "v={v}: {drift}");
    }
}

#[test]
fn noisy_survey_survives_csv_and_calibrates() {
    let clean = generate_synth(5000, &RngSpec::new(2)).unwrap();
    let noisy = apply_noise(&clean, NoiseModel::new(2).unwrap(), &RngSpec::new(3)).unwrap();
    let mut buf = Vec::new();
    write_survey(&mut buf, &noisy).unwrap();
    let back = read_survey(buf.as_slice()).unwrap().dataset;
    assert_eq!(back, noisy);

    let x: Vec<Vec<f64>> = back
        .records()
        .iter()
        .map(|r| vec![r.unbiased_score.unwrap().get() as f64])
        .collect();
    let y: Vec<f64> = back.records().iter().map(|r| r.biased_score.get() as f64).collect();
    let fit = ordnoise::ols::ols_fit(&x, &y).unwrap();
    let curve = synth_rmse_curve(9, 5000, &RngSpec::new(4)).unwrap();
    let v_hat = estimate_variability(fit.rmse, &curve).v_hat;
    assert!((v_hat - 2.0).abs() < 0.3, "{v_hat}");
}

#[test]
fn exact_curve_csv_is_stable() {
    let scheme: BinningScheme = "1-5,6-10".parse().unwrap();
    let render = || {
        let mut buf = Vec::new();
        write_curve(&mut buf, &bound_curve(&scheme, 9, &Method::Exact).unwrap()).unwrap();
        buf
    };
    let a = render();
    assert_eq!(a, render());
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().next().unwrap().contains("share_bin1,nps_unbiased"));
    assert_eq!(text.lines().count(), 11);
}
