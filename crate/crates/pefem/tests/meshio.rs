use std::path::Path;

use pefem::meshio;
use pefem::CliError;
use pefem_core::geometry::CurvedDomain;
use pefem_core::study::mesh_sequence;

#[test]
fn round_trip_is_exact() {
    for d in [CurvedDomain::unit_disk(), CurvedDomain::ellipse(), CurvedDomain::star()] {
        let mesh = mesh_sequence(&d, pefem_core::study::default_boundary_count(&d), 1)
            .unwrap()
            .pop()
            .unwrap();
        let text = meshio::to_string(&mesh);
        let back = meshio::parse(&text, Path::new("mem"), &d, mesh.level).unwrap();
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.boundary_edges, mesh.boundary_edges);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        assert_eq!(back.h, mesh.h);
        assert_eq!(back.delta_h, mesh.delta_h);
        assert_eq!(meshio::to_string(&back), text);
    }
}

#[test]
fn file_layout() {
    let d = CurvedDomain::unit_disk();
    let mesh = mesh_sequence(&d, 8, 0).unwrap().pop().unwrap();
    let text = meshio::to_string(&mesh);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "pefem-mesh v1");
    assert_eq!(lines[1], format!("vertices {}", mesh.vertices.len()));
    let t = 2 + mesh.vertices.len();
    assert_eq!(lines[t], format!("triangles {}", mesh.triangles.len()));
    let b = t + 1 + mesh.triangles.len();
    assert_eq!(lines[b], format!("boundary_edges {}", mesh.boundary_edges.len()));
    assert_eq!(lines.len(), b + 1 + mesh.boundary_edges.len());
    // 17 significant digits: one before the point and sixteen after
    let x = lines[3].split_whitespace().next().unwrap();
    let mantissa = x.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.len(), 18);
    assert_eq!(lines[b + 1].split_whitespace().count(), 4);
}

fn parse_error(text: &str) -> (usize, String) {
    match meshio::parse(text, Path::new("bad"), &CurvedDomain::unit_disk(), 0) {
        Err(CliError::Parse { line, message, .. }) => (line, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn malformed_files_report_the_line() {
    let mesh = mesh_sequence(&CurvedDomain::unit_disk(), 8, 0).unwrap().pop().unwrap();
    let good = meshio::to_string(&mesh);
    assert_eq!(parse_error("pefem-mesh v2\n").0, 1);
    let (line, msg) = parse_error(&good.replacen("vertices", "points", 1));
    assert_eq!(line, 2);
    assert!(msg.contains("vertices"));
    let mut lines: Vec<String> = good.lines().map(String::from).collect();
    lines[4].push_str(" 7");
    assert_eq!(parse_error(&lines.join("\n")).0, 5);
    lines[4] = "0.5 abc".into();
    assert_eq!(parse_error(&lines.join("\n")).0, 5);
    let truncated: Vec<&str> = good.lines().take(10).collect();
    assert!(parse_error(&truncated.join("\n")).1.contains("end of file"));
    assert!(parse_error(&format!("{good}extra\n")).1.contains("extra"));
}

#[test]
fn invalid_geometry_is_rejected() {
    let d = CurvedDomain::unit_disk();
    let mesh = mesh_sequence(&d, 8, 0).unwrap().pop().unwrap();
    // pull an interior vertex onto its neighbour to create a sliver
    let mut text = meshio::to_string(&mesh);
    let moved = format!("{} {}", meshio::real(0.999), meshio::real(0.0));
    let first_vertex = text.lines().nth(2).unwrap().to_string();
    text = text.replacen(&first_vertex, &moved, 1);
    let r = meshio::parse(&text, Path::new("sliver"), &d, 0);
    assert!(matches!(r, Err(CliError::Core(_))), "{r:?}");
    // out-of-range index
    let bad = meshio::to_string(&mesh).replacen("\n0 ", "\n999 ", 1);
    assert!(meshio::parse(&bad, Path::new("index"), &d, 0).is_err());
}
