use std::path::PathBuf;

use dyadic_lab_cli::config::{
    ConfigError, ExperimentConfig, FileConfig, OutputFormat, Overrides, Subcommand,
};

fn seeded() -> Overrides {
    Overrides {
        seed: Some(3),
        ..Overrides::default()
    }
}

#[test]
fn defaults_apply_without_file_or_flags() {
    let cfg = ExperimentConfig::resolve_with(
        Subcommand::VerifyLemma,
        &FileConfig::default(),
        &Overrides::default(),
        None,
    )
    .unwrap();
    assert_eq!(cfg.depth, 1);
    assert_eq!(cfg.grid, 1024);
    assert_eq!(cfg.format, OutputFormat::Csv);
    assert_eq!(cfg.output, None);
    assert_eq!(cfg.seed, None);
}

#[test]
fn flags_override_file_and_file_overrides_defaults() {
    let file = FileConfig::parse("depth = 3\ntrials = 7\nformat = \"json\"\n").unwrap();
    let cli = Overrides {
        depth: Some(5),
        ..seeded()
    };
    let cfg =
        ExperimentConfig::resolve_with(Subcommand::VerifyWeakForm, &file, &cli, None).unwrap();
    assert_eq!(cfg.depth, 5);
    assert_eq!(cfg.trials, 7);
    assert_eq!(cfg.format, OutputFormat::Json);
    assert_eq!(cfg.restarts, 20);
}

#[test]
fn output_dir_names_file_after_subcommand() {
    let cli = Overrides {
        format: Some(OutputFormat::Json),
        ..seeded()
    };
    let cfg = ExperimentConfig::resolve_with(
        Subcommand::VerifyDistribution,
        &FileConfig::default(),
        &cli,
        Some(PathBuf::from("/tmp/out")),
    )
    .unwrap();
    assert_eq!(
        cfg.output,
        Some(PathBuf::from("/tmp/out/verify-distribution.json"))
    );
}

#[test]
fn explicit_output_beats_output_dir() {
    let cli = Overrides {
        output: Some(PathBuf::from("x.csv")),
        ..seeded()
    };
    let cfg = ExperimentConfig::resolve_with(
        Subcommand::EstimateNorms,
        &FileConfig::default(),
        &cli,
        Some("/d".into()),
    )
    .unwrap();
    assert_eq!(cfg.output, Some(PathBuf::from("x.csv")));
}

#[test]
fn unknown_file_key_is_rejected() {
    assert!(matches!(
        FileConfig::parse("depht = 3"),
        Err(ConfigError::Parse { .. })
    ));
    assert!(matches!(
        FileConfig::parse("depth = \"three\""),
        Err(ConfigError::Parse { .. })
    ));
}

#[test]
fn randomized_subcommands_need_a_seed() {
    for sub in [
        Subcommand::VerifyWeakForm,
        Subcommand::VerifyModulation,
        Subcommand::VerifyDistribution,
        Subcommand::EstimateNorms,
    ] {
        let r = ExperimentConfig::resolve_with(
            sub,
            &FileConfig::default(),
            &Overrides::default(),
            None,
        );
        assert!(matches!(r, Err(ConfigError::Invalid(_))), "{}", sub.name());
    }
}

#[test]
fn invalid_values_are_rejected() {
    let cases = [
        Overrides {
            grid: Some(1000),
            ..seeded()
        },
        Overrides {
            depth: Some(12),
            ..seeded()
        },
        Overrides {
            order: Some(0),
            ..seeded()
        },
        Overrides {
            exponents: Some(vec![1.0]),
            ..seeded()
        },
        Overrides {
            spaces: Some(vec!["banach".into()]),
            ..seeded()
        },
        Overrides {
            slack: Some(0.5),
            ..seeded()
        },
        Overrides {
            restarts: Some(0),
            ..seeded()
        },
    ];
    for cli in cases {
        let r = ExperimentConfig::resolve_with(
            Subcommand::EstimateNorms,
            &FileConfig::default(),
            &cli,
            None,
        );
        assert!(r.is_err(), "{cli:?}");
    }
}

#[test]
fn modulation_depth_is_capped() {
    let cli = Overrides {
        depth: Some(4),
        ..seeded()
    };
    let r = ExperimentConfig::resolve_with(
        Subcommand::VerifyModulation,
        &FileConfig::default(),
        &cli,
        None,
    );
    assert!(r.is_err());
}

#[test]
fn display_echoes_every_key() {
    let cfg = ExperimentConfig::resolve_with(
        Subcommand::EstimateNorms,
        &FileConfig::default(),
        &seeded(),
        None,
    )
    .unwrap();
    let s = cfg.to_string();
    for key in [
        "subcommand=estimate-norms",
        "seed=3",
        "grid=1024",
        "slack=1.1",
    ] {
        assert!(s.contains(key), "{s}");
    }
}
