use htica::eval::{amari_index, evaluate};
use htica::ica::{
    fastica, fit_orthogonalizer, run_htica, run_pipeline, ContrastFunction, PipelineConfig,
    Whitened,
};
use htica::orthogonalize::{OrthMethod, Orthogonalizer};
use htica::sampling::{substream, IcaInstance, MixingKind, TailExponents};
use htica::{Error, SampleMatrix};
use nalgebra::DMatrix;

fn instance(eta: &[f64], kind: MixingKind, seed: u64) -> IcaInstance {
    IcaInstance::random(TailExponents::new(eta.to_vec()).unwrap(), kind, seed).unwrap()
}

#[test]
fn one_dimensional_estimate_is_a_sign() {
    let x = instance(&[4.0], MixingKind::RandomUnitColumns, 1)
        .generate(500)
        .unwrap();
    for contrast in ContrastFunction::ALL {
        let est = fastica(&x, contrast, &mut substream(1, 0), 1e-6, 100).unwrap();
        assert_eq!(est.a_hat.shape(), (1, 1));
        assert!((est.a_hat[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(est.all_converged());
    }
}

#[test]
fn recovers_two_light_tailed_sources() {
    let mut good = 0;
    for seed in 0..10 {
        let inst = instance(&[6.0, 6.0], MixingKind::RandomUnitColumns, 40 + seed);
        let x = inst.generate(100_000).unwrap();
        let est = fastica(
            &x,
            ContrastFunction::Pow3,
            &mut substream(seed, 5),
            1e-6,
            1000,
        )
        .unwrap();
        if est.all_converged() && amari_index(inst.mixing(), &est.a_hat).unwrap() <= 0.05 {
            good += 1;
        }
    }
    assert!(good >= 8, "{good}/10 seeds recovered");
}

#[test]
fn whitened_data_has_identity_covariance() {
    let x = instance(&[3.0, 4.0, 6.0], MixingKind::RandomUnitColumns, 2)
        .generate(20_000)
        .unwrap();
    let white = Whitened::new(&x).unwrap();
    let n = white.z.ncols() as f64;
    let cov = &white.z * white.z.transpose() / n;
    assert!((cov - DMatrix::identity(3, 3)).abs().max() <= 1e-6);
    for row in white.z.row_iter() {
        assert!((row.sum() / n).abs() < 1e-10);
    }
    let est = white
        .fixed_point(ContrastFunction::Tanh, DMatrix::identity(3, 3), 1e-6, 500)
        .unwrap();
    let wtw = est.w.transpose() * &est.w;
    assert!((wtw - DMatrix::identity(3, 3)).abs().max() <= 1e-8);
    for c in est.a_hat.column_iter() {
        assert!((c.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn too_few_samples() {
    let x = SampleMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
    assert!(matches!(
        fastica(&x, ContrastFunction::Pow3, &mut substream(0, 0), 1e-6, 10),
        Err(Error::InsufficientSamples { .. })
    ));
    let flat =
        SampleMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0], [3.0, 6.0]]).unwrap();
    assert!(matches!(
        fastica(
            &flat,
            ContrastFunction::Pow3,
            &mut substream(0, 0),
            1e-6,
            10
        ),
        Err(Error::SingularInput { .. })
    ));
}

#[test]
fn same_seed_same_estimate() {
    let inst = instance(&[2.1, 2.1, 6.0], MixingKind::RandomUnitColumns, 3);
    let x = inst.generate(5000).unwrap();
    let config = PipelineConfig::new(OrthMethod::Centroid, true, ContrastFunction::Tanh);
    let (a, ra) = run_htica(&x, &config, &mut substream(9, 0), Some(inst.mixing())).unwrap();
    let (b, rb) = run_htica(&x, &config, &mut substream(9, 0), Some(inst.mixing())).unwrap();
    assert_eq!(a.a_hat, b.a_hat);
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(ra.unwrap().frobenius_error, rb.unwrap().frobenius_error);
}

#[test]
fn source_relabelling_does_not_change_the_score() {
    // mixing with the columns of A permuted and negated gives the same data
    // distribution, so a signed permutation of the truth scores the same
    let inst = instance(&[6.0, 6.0, 6.0], MixingKind::RandomUnitColumns, 11);
    let x = inst.generate(50_000).unwrap();
    let est = fastica(
        &x,
        ContrastFunction::Tanh,
        &mut substream(11, 1),
        1e-6,
        1000,
    )
    .unwrap();
    let a = inst.mixing();
    let mut relabelled = DMatrix::zeros(3, 3);
    for (j, (&src, s)) in [2usize, 0, 1].iter().zip([1.0, -1.0, -1.0]).enumerate() {
        relabelled.set_column(j, &(a.column(src) * s));
    }
    let r1 = evaluate(a, &est.a_hat).unwrap();
    let r2 = evaluate(&relabelled, &est.a_hat).unwrap();
    assert!((r1.frobenius_error - r2.frobenius_error).abs() < 1e-12);
    assert!((r1.amari_index - r2.amari_index).abs() < 1e-12);
}

#[test]
fn oracle_pipeline_recovers_the_mixing_matrix() {
    let inst = instance(&[6.0, 6.0, 2.1], MixingKind::RandomUnitColumns, 21);
    let x = inst.generate(50_000).unwrap();
    let config = PipelineConfig::new(OrthMethod::Oracle, true, ContrastFunction::Tanh);
    let (_, report) = run_htica(&x, &config, &mut substream(21, 0), Some(inst.mixing())).unwrap();
    let report = report.unwrap();
    assert!(report.amari_index < 0.05, "{report:?}");
    let diag = report.diagnostics.unwrap();
    assert!((diag.sigma_min_normalized - 1.0).abs() < 1e-9);
}

#[test]
fn identity_pipeline_matches_plain_fastica() {
    let inst = instance(&[4.0, 5.0], MixingKind::RandomUnitColumns, 8);
    let x = inst.generate(4000).unwrap();
    let mut config = PipelineConfig::new(OrthMethod::Identity, false, ContrastFunction::Pow3);
    config.max_restarts = 1;
    let b = Orthogonalizer::identity(2);
    let out = run_pipeline(&x, &b, &config, &mut substream(8, 3)).unwrap();
    let plain = fastica(&x, ContrastFunction::Pow3, &mut substream(8, 3), 1e-6, 1000).unwrap();
    assert!((out.estimate.a_hat - plain.a_hat).abs().max() < 1e-12);
    assert_eq!(out.attempts, 1);
    assert!(out.damping.is_none());
}

#[test]
fn damping_is_reported() {
    let inst = instance(&[2.1, 2.1], MixingKind::Orthogonal, 5);
    let x = inst.generate(20_000).unwrap();
    let config = PipelineConfig::new(OrthMethod::Covariance, true, ContrastFunction::Pow3);
    let b = fit_orthogonalizer(&x, &config, None).unwrap();
    let out = run_pipeline(&x, &b, &config, &mut substream(5, 0)).unwrap();
    let d = out.damping.unwrap();
    assert!((d.acceptance_rate - 0.75).abs() < 0.02);
    assert!(d.radius > 0.0);
}

#[test]
fn unconverged_runs_are_errors() {
    let inst = instance(&[3.0, 3.0, 3.0], MixingKind::RandomUnitColumns, 6);
    let x = inst.generate(3000).unwrap();
    let mut config = PipelineConfig::new(OrthMethod::Covariance, false, ContrastFunction::Pow3);
    config.max_iter = 1;
    config.max_restarts = 2;
    match run_htica(&x, &config, &mut substream(6, 0), None) {
        Err(Error::Unconverged {
            restarts,
            converged,
        }) => {
            assert_eq!(restarts, 2);
            assert_eq!(converged.len(), 3);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
    config.max_restarts = 0;
    assert!(run_htica(&x, &config, &mut substream(6, 0), None).is_err());
}

#[test]
fn contrast_names() {
    for c in ContrastFunction::ALL {
        assert_eq!(c.to_string().parse::<ContrastFunction>().unwrap(), c);
    }
    assert_eq!(
        "logcosh".parse::<ContrastFunction>().unwrap(),
        ContrastFunction::Tanh
    );
    assert!("gauss".parse::<ContrastFunction>().is_err());
    let c = ContrastFunction::Pow3;
    assert_eq!(c.g(2.0), 8.0);
    assert_eq!(c.g_prime(2.0), 12.0);
    let t = ContrastFunction::Tanh;
    assert!((t.g_prime(0.3) - (1.0 - 0.3f64.tanh().powi(2))).abs() < 1e-15);
}
