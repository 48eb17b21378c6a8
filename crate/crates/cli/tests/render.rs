use chfif::bundled;
use chfif::document::parse_problem;
use chfif::render::{render_svg, RenderError, RenderSettings};
use chfif_core::attractor::{chaos_game, MapSelection, PointSet3};
use chfif_core::evaluator::solve_fixed_point;
use chfif_core::model::{validate_dataset, validate_graph, GDIFSystem, Scaling, ScalingParams};
use chfif_core::solver::{build_system, SolveMethod};
use chfif_core::Point3;

fn uniform() -> GDIFSystem {
    parse_problem(bundled::UNIFORM)
        .unwrap()
        .build_system(SolveMethod::ClosedForm)
        .unwrap()
}

#[test]
fn one_panel_per_vertex_with_knots() {
    let sys = uniform();
    let fp = solve_fixed_point(&sys, 16, 1e-8, 1000).unwrap();
    let svg = render_svg(&sys, Some(&fp.functions), None, &RenderSettings::default()).unwrap();
    assert_eq!(svg.matches(r#"<g class="panel""#).count(), 2);
    assert_eq!(svg.matches(r#"class="knot""#).count(), 6 + 5);
    assert_eq!(svg.matches(r#"class="f1""#).count(), 2);
    assert_eq!(svg.matches(r#"class="f2""#).count(), 0);
    assert!(svg.contains("vertex 1 (3 from 1, 2 from 2)"));
    assert!(
        svg.contains(r#"text-anchor="middle">5</text>"#),
        "x axis ends at 5"
    );
}

#[test]
fn output_is_deterministic() {
    let sys = uniform();
    let fp = solve_fixed_point(&sys, 16, 1e-8, 1000).unwrap();
    let cloud = chaos_game(&sys, 2000, 5, 10, MapSelection::Uniform);
    let settings = RenderSettings {
        show_f2: true,
        ..RenderSettings::default()
    };
    let a = render_svg(&sys, Some(&fp.functions), Some(&cloud), &settings).unwrap();
    let b = render_svg(&sys, Some(&fp.functions), Some(&cloud), &settings).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.matches(r#"class="f2""#).count(), 2);
    assert_eq!(a.matches(r#"<g class="cloud""#).count(), 2);
}

#[test]
fn flat_data_draws_a_flat_line() {
    let pts = (0..4).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
    let ds = vec![validate_dataset(0, pts).unwrap()];
    let graph = validate_graph(vec![vec![0; 3]], &ds).unwrap();
    let params = ScalingParams::uniform(&graph, Scaling::new(0.5, 0.2, 0.3)).unwrap();
    let sys = build_system(ds, graph, &params).unwrap();
    let fp = solve_fixed_point(&sys, 8, 1e-10, 100).unwrap();
    assert!(fp.functions[0].f1().all(|y| y == 0.0));
    let svg = render_svg(&sys, Some(&fp.functions), None, &RenderSettings::default()).unwrap();
    let line = svg.lines().find(|l| l.contains(r#"class="f1""#)).unwrap();
    let start = line.find("points=\"").unwrap() + 8;
    let ys: Vec<&str> = line[start..line.len() - 3]
        .split(' ')
        .map(|p| p.split_once(',').unwrap().1)
        .collect();
    assert!(ys.iter().all(|y| *y == ys[0]), "{ys:?}");
    assert!(svg.contains(">0</text>"), "zero tick is labelled");
}

#[test]
fn empty_input() {
    let sys = uniform();
    let empty = vec![
        PointSet3 {
            vertex: 0,
            points: vec![],
        },
        PointSet3 {
            vertex: 1,
            points: vec![],
        },
    ];
    let settings = RenderSettings::default();
    assert_eq!(
        render_svg(&sys, None, None, &settings),
        Err(RenderError::EmptyInput)
    );
    assert_eq!(
        render_svg(&sys, None, Some(&empty), &settings),
        Err(RenderError::EmptyInput)
    );
    assert_eq!(
        render_svg(&sys, None, Some(&empty[..1]), &settings),
        Err(RenderError::VertexMismatch {
            expected: 2,
            found: 1
        })
    );
}

#[test]
fn cloud_alone_is_enough() {
    let sys = uniform();
    let cloud = chaos_game(&sys, 500, 1, 10, MapSelection::Uniform);
    let svg = render_svg(&sys, None, Some(&cloud), &RenderSettings::default()).unwrap();
    assert_eq!(svg.matches(r#"class="f1""#).count(), 0);
    assert_eq!(svg.matches("<rect x=").count(), 2 * 490);
}
