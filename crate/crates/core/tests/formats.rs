use lslab_core::adversary::{permutation_inversion_system, upsilon_bounds, AdversaryReport, RelationSystemFile};
use lslab_core::harness::{read_csv, run_experiment, trial_rng, write_report, Experiment, ExperimentConfig, Format};
use lslab_core::snake::sample_snake;
use lslab_core::{Budget, Graph, GraphKind, Instance, InstanceFile, Snake, SnakeFile};
use serde_json::json;

#[test]
fn graph_kind_json() {
    let cases = [
        (GraphKind::Hypercube { n: 12 }, json!({"family": "hypercube", "n": 12})),
        (GraphKind::Grid { d: 3, side: 8 }, json!({"family": "grid", "d": 3, "side": 8})),
        (GraphKind::Line { size: 64 }, json!({"family": "line", "N": 64})),
        (GraphKind::Complete { size: 5 }, json!({"family": "complete", "N": 5})),
    ];
    for (kind, value) in cases {
        assert_eq!(serde_json::to_value(kind).unwrap(), value);
        assert_eq!(serde_json::from_value::<GraphKind>(value).unwrap(), kind);
    }
    assert!(serde_json::from_value::<GraphKind>(json!({"family": "torus", "n": 3})).is_err());
}

#[test]
fn instance_file_round_trip() {
    let text = r#"{"graph": {"family": "line", "N": 4}, "values": [3, 1, 0, 2], "minimum": 2,
                   "answer_bit": 1, "meta": {"generator": "manual"}}"#;
    let file: InstanceFile = serde_json::from_str(text).unwrap();
    let inst = Instance::from_file(file.clone()).unwrap();
    assert_eq!(inst.answer_bit(), Some(1));
    assert_eq!(inst.to_file(&Budget::default()).unwrap(), file);

    // the designated minimum has to be a local minimum
    let bad = text.replace(r#""minimum": 2"#, r#""minimum": 1"#);
    assert!(Instance::from_file(serde_json::from_str(&bad).unwrap()).is_err());
    let short = text.replace("[3, 1, 0, 2]", "[3, 1, 0]");
    assert!(Instance::from_file(serde_json::from_str(&short).unwrap()).is_err());
}

#[test]
fn snake_file_shape() {
    let g = Graph::grid(2, 4).unwrap();
    let mut r = trial_rng(5, 0);
    let head = g.random_vertex(&mut r);
    let x = sample_snake(&g, head, 7, &mut r).unwrap();
    let v = serde_json::to_value(x.to_file()).unwrap();
    assert_eq!(v["graph"], json!({"family": "grid", "d": 2, "side": 4}));
    assert_eq!(v["L"], 7);
    assert_eq!(v["head"], v["path"][6]);
    let back: SnakeFile = serde_json::from_value(v).unwrap();
    assert_eq!(Snake::from_file(&back).unwrap(), x);

    let broken = SnakeFile {
        path: vec![0, 5],
        head: 5,
        length: 2,
        graph: g.kind(),
    };
    assert!(Snake::from_file(&broken).is_err());
}

#[test]
fn adversary_report_and_system_import() {
    let sys = permutation_inversion_system(4, &Budget::default()).unwrap();
    let rep = upsilon_bounds(&sys).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    assert_eq!(v["upsilon_geom_sq"], "1/2");
    assert_eq!(v["upsilon_min"], "1/2");
    assert_eq!(v["total_weight"], "24");
    assert_eq!(serde_json::from_value::<AdversaryReport>(v).unwrap(), rep);

    let file = sys.to_file();
    let text = serde_json::to_string(&file).unwrap();
    let again = serde_json::from_str::<RelationSystemFile>(&text).unwrap().build().unwrap();
    assert_eq!(upsilon_bounds(&again).unwrap(), rep);

    // OR of two bits: 00 against 01 and 10
    let or: RelationSystemFile = serde_json::from_value(json!({
        "positions": 2,
        "a": [[0, 0]],
        "b": [[0, 1], [1, 0]],
        "relation": [[0, 0, "1/2"], [0, 1, "1/2"]]
    }))
    .unwrap();
    let rep = upsilon_bounds(&or.build().unwrap()).unwrap();
    assert!(rep.upsilon_min > num::BigRational::from_integer(0.into()));
}

#[test]
fn json_and_csv_agree() {
    let mut cfg = ExperimentConfig::new(Experiment::Sparse);
    cfg.graph = Some(GraphKind::Hypercube { n: 8 });
    cfg.trials = 6;
    cfg.seed = 21;
    let rep = run_experiment(&cfg, &Budget::default()).unwrap();

    let mut csv = Vec::new();
    write_report(&rep, Format::Csv, &mut csv).unwrap();
    let mut js = Vec::new();
    write_report(&rep, Format::Json, &mut js).unwrap();

    let from_csv = read_csv(std::str::from_utf8(&csv).unwrap()).unwrap();
    let from_json: lslab_core::harness::ExperimentReport = serde_json::from_slice(&js).unwrap();
    assert_eq!(from_csv, from_json.records);
    assert_eq!(from_json.aggregates, rep.aggregates);
    let recomputed = lslab_core::harness::aggregate(&from_csv, |m| {
        let a = rep.aggregate(m).unwrap();
        (a.claim.clone(), a.reference)
    });
    assert_eq!(recomputed, rep.aggregates);
}
