use itp_cli::config::{parse, parse_measure, parse_measure_list, parse_point, Candidate, StabSpec};
use itp_cli::Subcommand;
use itp_core::chars::TailRule;
use itp_core::measures::Measure1D;
use proptest::prelude::*;

#[test]
fn defaults_fill_missing_keys() {
    let cfg = parse("[run]\nsubcommand = spectrum\n").unwrap();
    assert_eq!(cfg.subcommand, Some(Subcommand::Spectrum));
    assert_eq!(cfg.depth, 64);
    assert_eq!(cfg.tol, 1e-10);
    assert_eq!(cfg.stab, StabSpec::Auto);
    assert_eq!(cfg.candidate, Candidate::State);
    assert!(parse("").unwrap().subcommand.is_none());
}

#[test]
fn full_configuration() {
    let text = "\
# comment
[run]
subcommand = excess   # trailing comment
depth = 32
tol = 1e-9
seed = 5
samples = 1000

[measure]
prefix = uniform(-1, 1), gaussian(2)
cycle = gaussian

[stab]
levels = periodic
prefix = 1, 2
cycle = 3

[points]
x = 1:0.5, 3:-2
x =
random = 3

[character]
q = 0.25
tail = level-offset
delta = 0.5
deviations = 2:1.5
";
    let cfg = parse(text).unwrap();
    assert_eq!(cfg.subcommand, Some(Subcommand::Excess));
    assert_eq!((cfg.depth, cfg.seed, cfg.samples), (32, 5, 1000));
    assert_eq!(cfg.measure.prefix(), &[Measure1D::uniform(-1.0, 1.0).unwrap(), Measure1D::gaussian(2.0).unwrap()]);
    assert_eq!(cfg.measure.cycle(), &[Measure1D::standard_gaussian()]);
    assert_eq!(cfg.stab, StabSpec::Periodic { prefix: vec![1, 2], cycle: vec![3] });
    assert_eq!(cfg.points.explicit.len(), 2);
    assert!(cfg.points.explicit[1].is_empty());
    assert_eq!(cfg.points.random, 3);
    let ch = cfg.character.unwrap();
    assert_eq!(ch.q, 0.25);
    assert_eq!(ch.tail, TailRule::LevelOffset { delta: 0.5 });
    assert_eq!(ch.deviations.get(&2), Some(&1.5));
}

fn line_of(text: &str) -> (usize, String) {
    let e = parse(text).unwrap_err();
    (e.line, e.to_string())
}

#[test]
fn diagnostics_name_the_line() {
    assert_eq!(line_of("[run]\ndepth = 3\nbogus = 1\n").0, 3);
    assert!(line_of("[run]\nbogus = 1\n").1.contains("unknown key `bogus` in [run]"));
    assert_eq!(line_of("\n[nowhere]\n").0, 2);
    assert_eq!(line_of("depth = 3\n").0, 1);
    assert_eq!(line_of("[run]\ndepth = 3\ndepth = 4\n").0, 3);
    assert_eq!(line_of("[run]\ndepth = 0\n").0, 2);
    assert_eq!(line_of("[run]\ndepth = -1\n").0, 2);
    assert_eq!(line_of("[run]\ntol = nan\n").0, 2);
    assert_eq!(line_of("[run]\nsubcommand = dance\n").0, 2);
    assert_eq!(line_of("[run]\njust text\n").0, 2);
    assert_eq!(line_of("[run\n").0, 1);
    assert_eq!(line_of("[run]\n[run]\n").0, 2);
    assert_eq!(line_of("[measure]\ncycle = gaussian(-1)\n").0, 2);
    assert_eq!(line_of("[measure]\nprefix = gaussian\n").0, 2);
    assert_eq!(line_of("[stab]\nlevels = auto\ncycle = 1\n").0, 2);
    assert_eq!(line_of("[stab]\ncycle = 0\n").0, 2);
    assert_eq!(line_of("[points]\nx = 0:1\n").0, 2);
    assert_eq!(line_of("[points]\nx = 1:1, 1:2\n").0, 2);
    assert_eq!(line_of("[character]\nq = 0.5\ntail = constant\ntheta = 0.1\n").0, 4);
    assert_eq!(line_of("[character]\nq = 0.5\ntheta = 3\n").0, 3);
}

#[test]
fn q_outside_unit_interval_is_rejected() {
    let (line, msg) = line_of("[run]\nsubcommand = spectrum\n[character]\nq = 1.5\n");
    assert_eq!(line, 4);
    assert!(msg.contains("q must lie in (0,1]"), "{msg}");
    assert!(parse("[character]\nq = 0\n").is_err());
    assert!(parse("[character]\nq = 1\n").is_ok());
}

#[test]
fn measure_specs() {
    assert_eq!(parse_measure("gaussian(0.5)").unwrap(), Measure1D::gaussian(0.5).unwrap());
    assert_eq!(parse_measure(" uniform( -2 , 3 ) ").unwrap(), Measure1D::uniform(-2.0, 3.0).unwrap());
    let tri = parse_measure(r#"density({"breakpoints":[-1,0,1],"pieces":[[0,1],[1,-1]]})"#).unwrap();
    assert!((tri.pdf(0.0) - 1.0).abs() < 1e-12);
    assert!(parse_measure("uniform(1)").is_err());
    assert!(parse_measure("uniform(2, 1)").is_err());
    assert!(parse_measure("cauchy(1)").is_err());
    assert!(parse_measure("gaussian(1").is_err());
    assert_eq!(parse_measure_list("").unwrap(), vec![]);
    let list = parse_measure_list(r#"gaussian, density({"breakpoints":[0,1],"pieces":[[1]]}), uniform(0, 1)"#).unwrap();
    assert_eq!(list.len(), 3);
}

proptest! {
    #[test]
    fn points_round_trip(x in proptest::collection::btree_map(1usize..=20, -5.0f64..5.0, 0..=5)) {
        let text = x.iter().map(|(n, v)| format!("{n}:{v}")).collect::<Vec<_>>().join(", ");
        let back = parse_point(&text).unwrap();
        let want: std::collections::BTreeMap<usize, f64> = x.into_iter().filter(|&(_, v)| v != 0.0).collect();
        prop_assert_eq!(back, want);
    }

    #[test]
    fn parser_never_panics(text in "[\\[\\]a-z_=0-9.,:() \n#-]{0,200}") {
        let _ = parse(&text);
    }

    #[test]
    fn gaussian_specs_round_trip(sigma in 0.01f64..100.0) {
        prop_assert_eq!(parse_measure(&format!("gaussian({sigma})")).unwrap(), Measure1D::gaussian(sigma).unwrap());
    }
}

#[test]
fn fuzz_seeds_stay_parseable() {
    let corpus = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |target: &str| -> Vec<(String, String)> {
        let mut v: Vec<_> = std::fs::read_dir(corpus.join(target))
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read_to_string(e.path()).unwrap()))
            .collect();
        v.sort();
        v
    };
    for (name, text) in read("config") {
        assert_eq!(parse(&text).is_ok(), !matches!(name.as_str(), "bad_q" | "unknown_key"), "{name}");
    }
    for (name, text) in read("scalar_fn_json") {
        assert!(serde_json::from_str::<itp_core::fnalg::ScalarFn>(&text).is_ok(), "{name}");
    }
    for (name, text) in read("tensor_json") {
        assert!(itp_core::tensor::tensor_from_json(&text).is_ok(), "{name}");
    }
    for (name, text) in read("product_measure_json") {
        let ok =
            serde_json::from_str::<Measure1D>(&text).is_ok() || serde_json::from_str::<itp_core::measures::ProductMeasure>(&text).is_ok();
        assert!(ok, "{name}");
    }
    for (name, text) in read("measure_spec") {
        assert!(parse_measure_list(&text).is_ok() || parse_point(&text).is_ok(), "{name}");
    }
}
