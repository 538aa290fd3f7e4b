use coherence_kit::coherence::exact::{coherent_diversification_rational, gamma_rational, Rational};
use coherence_kit::coherence::{coherent_diversification, gamma};
use coherence_kit::ingest::{build_matrix, BuildOptions};
use coherence_kit::relatedness::{
    export_matrix, spanning_tree, taxonomy, DegreeVectors, NetworkFormat, TreeMode,
};
use coherence_kit::synth::{toy_records, toy_taxonomy, TOY_FIRMS, TOY_M};

const GAMMA_X: [i64; 11] = [3, 4, 4, 3, 3, 4, 4, 3, 0, 0, 0];
const GAMMA_Z: [i64; 11] = [3, 3, 3, 1, 1, 0, 0, 0, 2, 2, 2];

fn toy_matrix() -> coherence_kit::BipartiteMatrix {
    build_matrix(&toy_records(2010), &BuildOptions::new(2010)).unwrap()
}

#[test]
fn built_matrix_is_the_toy_matrix() {
    let m = toy_matrix();
    assert_eq!(m.row_ids(), TOY_FIRMS);
    for (f, row) in TOY_M.iter().enumerate() {
        let owned: Vec<usize> = (0..11).filter(|&t| row[t] == 1).collect();
        assert_eq!(m.row_cols(f), owned.as_slice());
    }
}

#[test]
fn gamma_rows_in_floating_point() {
    let m = toy_matrix();
    let g = gamma(&m, &toy_taxonomy()).unwrap();
    let x: Vec<f64> = GAMMA_X.iter().map(|&v| v as f64).collect();
    let z: Vec<f64> = GAMMA_Z.iter().map(|&v| v as f64).collect();
    assert_eq!(g.row(0), x.as_slice());
    assert_eq!(g.row(2), z.as_slice());
    assert_eq!(coherent_diversification(&m, &g).unwrap(), vec![3.5, 3.0, 2.6]);
}

#[test]
fn gamma_rows_in_rational_arithmetic() {
    let m: Vec<Vec<u8>> = TOY_M.iter().map(|r| r.to_vec()).collect();
    let b: Vec<Vec<Rational>> = toy_taxonomy()
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|&v| Rational::from_integer(v as i64)).collect())
        .collect();
    let g = gamma_rational(&m, &b).unwrap();
    let ints = |row: &[i64]| row.iter().map(|&v| Rational::from_integer(v)).collect::<Vec<_>>();
    assert_eq!(g[0], ints(&GAMMA_X));
    assert_eq!(g[2], ints(&GAMMA_Z));
    let big_gamma = coherent_diversification_rational(&m, &g).unwrap();
    assert_eq!(
        big_gamma,
        vec![Rational::new(7, 2), Rational::from_integer(3), Rational::new(13, 5)]
    );
}

#[test]
fn unowned_technologies_get_gamma_from_neighbours() {
    let g = gamma(&toy_matrix(), &toy_taxonomy()).unwrap();
    // z owns neither 3 nor 4 but is adjacent to both through 1 and 2.
    assert_eq!(TOY_M[2][3], 0);
    assert_eq!(TOY_M[2][4], 0);
    assert!(g.get(2, 3) > 0.0 && g.get(2, 4) > 0.0);
}

#[test]
fn graphml_export_parses() {
    let b = toy_taxonomy();
    let xml = String::from_utf8(export_matrix(&b, NetworkFormat::GraphMl)).unwrap();
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "graphml");
    let graph = root.children().find(|n| n.has_tag_name("graph")).unwrap();
    assert_eq!(graph.attribute("edgedefault"), Some("undirected"));
    let nodes = graph.children().filter(|n| n.has_tag_name("node")).count();
    let edges: Vec<_> = graph.children().filter(|n| n.has_tag_name("edge")).collect();
    assert_eq!(nodes, 11);
    let upper = (0..11)
        .flat_map(|i| (i + 1..11).map(move |j| (i, j)))
        .filter(|&(i, j)| b.get(i, j) != 0.0)
        .count();
    assert_eq!(edges.len(), upper);
    let ids = b.tech_ids();
    for e in edges {
        let s = ids.iter().position(|c| Some(c.as_str()) == e.attribute("source")).unwrap();
        let t = ids.iter().position(|c| Some(c.as_str()) == e.attribute("target")).unwrap();
        let w: f64 = e
            .children()
            .find(|c| c.has_tag_name("data") && c.attribute("key") == Some("weight"))
            .and_then(|c| c.text())
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(w, b.get(s, t));
    }
}

#[test]
fn estimated_taxonomy_and_tree_on_toy_matrix() {
    let m = toy_matrix();
    let b = taxonomy(&m, &DegreeVectors::from_binary(&m).unwrap()).unwrap();
    assert!(b.asymmetry() <= 1e-12);
    // Techs 0 and 1 are held by x (d=8) and z (d=5); u = 2.
    assert!((b.get(0, 1) - (1.0 / 8.0 + 1.0 / 5.0) / 2.0).abs() < 1e-15);
    // Tech 10 is held by y alone (d=3).
    assert!((b.get(10, 10) - 1.0 / 3.0).abs() < 1e-15);
    let tree = spanning_tree(&b, TreeMode::Max).unwrap();
    // z links the x block to the y block, so the graph is connected.
    assert_eq!(tree.edges.len(), 10);
}
