use std::fs;

use pairtune::datamodel::{PromptStyle, Scenario};
use pairtune::scenarios::{SeedReport, TaskAggregate, TaskRecord};
use pairtune::{render_curves, Error, Placement, RunReport};

fn report(trajectories: &[Vec<f64>]) -> RunReport {
    let seeds: Vec<SeedReport> = trajectories
        .iter()
        .enumerate()
        .map(|(s, traj)| SeedReport {
            seed: s as u64,
            tasks: traj
                .iter()
                .enumerate()
                .map(|(k, &m)| TaskRecord { task_index: k + 1, mean_auc: m, per_disease_auc: vec![Some(m)], train_loss_trace: vec![0.5] })
                .collect(),
            final_checksum: String::new(),
        })
        .collect();
    let tasks = trajectories.first().map_or(0, Vec::len);
    let aggregate = (0..tasks)
        .map(|k| TaskAggregate {
            task_index: k + 1,
            mean: trajectories.iter().map(|t| t[k]).sum::<f64>() / trajectories.len() as f64,
            std: None,
        })
        .collect();
    RunReport {
        scenario: Scenario::ClassIncremental,
        prompt_style: PromptStyle::Template,
        placement: Placement::Both,
        disease_names: vec!["a".into()],
        seeds,
        aggregate,
        warnings: vec![],
    }
}

fn polylines<'a>(svg: &'a str, class: &str) -> Vec<&'a str> {
    svg.lines().filter(|l| l.contains("<polyline") && l.contains(&format!("class=\"{class}\""))).collect()
}

fn point_count(line: &str) -> usize {
    let start = line.find("points=\"").unwrap() + 8;
    let end = start + line[start..].find('"').unwrap();
    line[start..end].split_whitespace().count()
}

#[test]
fn one_seed_three_tasks_draws_one_thin_line() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("curves.svg");
    render_curves(&report(&[vec![0.7, 0.75, 0.8]]), None, &svg_path).unwrap();
    let svg = fs::read_to_string(&svg_path).unwrap();
    let thin = polylines(&svg, "seed");
    assert_eq!(thin.len(), 1);
    assert_eq!(point_count(thin[0]), 3);
    assert_eq!(polylines(&svg, "mean").len(), 1);
    assert!(!svg.contains("class=\"baseline\""));
}

#[test]
fn empty_report_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("curves.svg");
    assert!(matches!(render_curves(&report(&[]), None, &svg_path), Err(Error::EmptyReport)));
    assert!(!svg_path.exists());
    assert!(!dir.path().join("curves.csv").exists());
}

#[test]
fn thick_line_is_the_mean_of_the_thin_lines() {
    let trajectories = vec![
        vec![0.70, 0.72, 0.71, 0.74, 0.78],
        vec![0.66, 0.73, 0.75, 0.70, 0.79],
        vec![0.71, 0.69, 0.77, 0.76, 0.80],
    ];
    let dir = tempfile::tempdir().unwrap();
    let csv_path = render_curves(&report(&trajectories), Some(0.8), dir.path().join("c.svg")).unwrap();
    let svg = fs::read_to_string(dir.path().join("c.svg")).unwrap();
    assert_eq!(polylines(&svg, "seed").len(), 3);
    assert!(polylines(&svg, "seed").iter().all(|l| point_count(l) == 5));
    assert!(svg.contains("class=\"baseline\""));

    let csv = fs::read_to_string(csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "task,seed_0,seed_1,seed_2,mean");
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let recomputed = (v[1] + v[2] + v[3]) / 3.0;
        assert!((v[4] - recomputed).abs() < 1e-12, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 5);
}
