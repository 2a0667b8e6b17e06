use proptest::prelude::*;
use raf_cli::{parse_config, CliError, GeometrySpec, Grid, LambdaSetting, Quantity, Spacing, SweepConfig};
use raf_core::{KernelFamily, Loss};

const BASE: &str = "quantity = lambda
min = 1e-3
max = 10
count = 5
spacing = log
loss = square
kernel = relu
alpha = 2.5
";

fn offending_key(text: &str) -> String {
    match parse_config(text) {
        Err(CliError::Config { key, .. }) => key,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn missing_eps_is_named() {
    assert_eq!(offending_key(BASE), "eps");
}

#[test]
fn out_of_range_eps_is_named() {
    assert_eq!(offending_key(&format!("{BASE}eps = 1.2\n")), "eps");
}

#[test]
fn unknown_and_repeated_keys_are_rejected() {
    assert_eq!(offending_key(&format!("{BASE}eps = 0.1\nlearning_rate = 3\n")), "learning_rate");
    assert_eq!(offending_key(&format!("{BASE}eps = 0.1\nalpha = 3\n")), "alpha");
}

#[test]
fn empty_grid_is_rejected() {
    let text = BASE.replace("count = 5", "count = 1");
    assert_eq!(offending_key(&format!("{text}eps = 0.1\n")), "count");
}

#[test]
fn comments_and_defaults() {
    let cfg = parse_config(&format!("# ridge sweep\n\n{BASE}eps = 0.1\n")).unwrap();
    assert!(cfg.endpoints);
    assert_eq!(cfg.kernel, Some(GeometrySpec::Family(KernelFamily::ReluArccos)));
    assert_eq!(cfg.grid.points().len(), 5);
    assert_eq!(cfg.grid.points()[0], 1e-3);
    assert_eq!(cfg.grid.points()[4], 10.0);
}

#[test]
fn half_given_coefficients_name_the_missing_one() {
    let text = BASE.replace("kernel = relu", "mu1 = 0.5");
    assert_eq!(offending_key(&format!("{text}eps = 0.1\n")), "mustar");
}

fn kernel_spec() -> impl Strategy<Value = GeometrySpec> {
    prop_oneof![
        Just(GeometrySpec::Family(KernelFamily::Linear)),
        Just(GeometrySpec::Family(KernelFamily::ErfArcsine)),
        (0.1f64..5.0).prop_map(|eta| GeometrySpec::Family(KernelFamily::SphericalGaussian { eta })),
        (1u32..5, 0.1f64..3.0).prop_map(|(degree, c)| GeometrySpec::Family(KernelFamily::Polynomial { c, degree })),
        (0.05f64..2.0, 0.0f64..2.0).prop_map(|(mu1, mu_star)| GeometrySpec::Coefficients { mu1, mu_star }),
        (0.01f64..1.5).prop_map(GeometrySpec::Angle),
    ]
}

fn sweep_config() -> impl Strategy<Value = SweepConfig> {
    (
        prop_oneof![Just(Quantity::Lambda), Just(Quantity::Alpha)],
        (1e-4f64..1.0, 1.0f64..100.0, 2usize..50, any::<bool>()),
        prop_oneof![Just(Loss::Square), Just(Loss::Hinge)],
        kernel_spec(),
        prop_oneof![
            (1e-4f64..10.0).prop_map(LambdaSetting::Value),
            Just(LambdaSetting::ZeroPlus),
            Just(LambdaSetting::Opt)
        ],
        (0.1f64..20.0, 0.0f64..=1.0, any::<bool>()),
    )
        .prop_map(|(quantity, (min, max, count, log), loss, kernel, lambda, (alpha, eps, endpoints))| {
            let spacing = if log { Spacing::Log } else { Spacing::Linear };
            SweepConfig {
                quantity,
                grid: Grid { min, max, count, spacing },
                loss,
                kernel: Some(kernel),
                lambda: (quantity != Quantity::Lambda).then_some(lambda),
                alpha: (quantity != Quantity::Alpha).then_some(alpha),
                eps: Some(eps),
                kappa: None,
                endpoints,
                output: None,
            }
        })
}

proptest! {
    #[test]
    fn canonical_text_round_trips(cfg in sweep_config()) {
        let text = cfg.to_config_string();
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
