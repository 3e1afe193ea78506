use std::collections::{BTreeSet, HashMap};

use serde_json::json;

use super::svg::{round4, sig4, sign_style, subclass_color, Anchor, Svg, INK};
use super::{PlotSpec, RenderedFigure, ReportWarning};
use crate::pipeline::AssociationNetwork;

/// Fundus features on the left, lipids on the right, each column ordered by
/// degree then name (the network's own node order). An empty network gives a
/// placeholder figure.
pub fn render_network(network: &AssociationNetwork, spec: &PlotSpec) -> RenderedFigure {
    if network.is_empty() {
        let mut svg = Svg::new(spec.width, 160.0, &spec.title);
        svg.text(
            spec.width / 2.0,
            90.0,
            Anchor::Middle,
            "placeholder",
            "No fundus feature reached the significance and degree thresholds",
        );
        return RenderedFigure {
            kind: spec.kind,
            svg: svg.finish(),
            data: json!({ "title": spec.title, "fundus_nodes": [], "lipid_nodes": [], "edges": [] }),
            warnings: vec![ReportWarning::EmptyNetwork],
        };
    }

    let step = 18.0;
    let top = 60.0;
    let n_rows = network.lipid_nodes.len().max(network.fundus_nodes.len());
    let col_h = (n_rows.max(1) - 1) as f64 * step;
    let subclasses: BTreeSet<Option<&str>> = network.lipid_nodes.iter().map(|n| n.subclass.as_deref()).collect();
    let legend_h = 30.0 + 18.0 * (subclasses.len() + 2) as f64;
    let height = top + col_h + 40.0 + legend_h;
    let (fx, lx) = (spec.width * 0.3, spec.width * 0.68);
    let spread = |k: usize, n: usize| {
        if n <= 1 {
            top + col_h / 2.0
        } else {
            top + col_h * k as f64 / (n - 1) as f64
        }
    };
    let f_pos: HashMap<&str, f64> = network
        .fundus_nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.name.as_str(), spread(k, network.fundus_nodes.len())))
        .collect();
    let l_pos: HashMap<&str, f64> = network
        .lipid_nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.name.as_str(), spread(k, network.lipid_nodes.len())))
        .collect();

    let mut svg = Svg::new(spec.width, height, &spec.title);
    let mut edges = Vec::with_capacity(network.edges.len());
    svg.open_group("edges");
    for e in &network.edges {
        let r = round4(e.r);
        let (color, class) = sign_style(r);
        let w = 0.6 + 10.0 * r.abs();
        svg.line(
            fx,
            f_pos[e.fundus.as_str()],
            lx,
            l_pos[e.lipid.as_str()],
            &format!("edge {class}"),
            color,
            w,
        );
        edges.push(json!({
            "source": e.fundus,
            "target": e.lipid,
            "r": r,
            "p_adjusted": sig4(e.p_adjusted),
            "sign": e.sign,
        }));
    }
    svg.close_group();

    svg.open_group("fundus-nodes");
    for n in &network.fundus_nodes {
        let y = f_pos[n.name.as_str()];
        svg.circle(fx, y, 7.0, "node fundus", INK);
        svg.text(
            fx - 12.0,
            y + 4.0,
            Anchor::End,
            "label",
            &format!("{} ({})", n.name, n.degree),
        );
    }
    svg.close_group();
    svg.open_group("lipid-nodes");
    for n in &network.lipid_nodes {
        let y = l_pos[n.name.as_str()];
        svg.circle(lx, y, 5.5, "node lipid", subclass_color(n.subclass.as_deref()));
        svg.text(lx + 10.0, y + 4.0, Anchor::Start, "label", &n.name);
    }
    svg.close_group();

    let ly = top + col_h + 40.0;
    svg.open_group("legend");
    for (k, (label, r)) in [("negative r", -1.0), ("positive r", 1.0)].iter().enumerate() {
        let (color, class) = sign_style(*r);
        let y = ly + k as f64 * 18.0;
        svg.line(40.0, y, 70.0, y, &format!("legend-edge {class}"), color, 3.0);
        svg.text(78.0, y + 4.0, Anchor::Start, "legend-label", label);
    }
    for (k, s) in subclasses.iter().enumerate() {
        let y = ly + (k + 2) as f64 * 18.0 + 8.0;
        svg.circle(55.0, y, 5.5, "legend-node", subclass_color(*s));
        svg.text(78.0, y + 4.0, Anchor::Start, "legend-label", s.unwrap_or("other"));
    }
    svg.close_group();

    let data = json!({
        "title": spec.title,
        "fundus_nodes": network.fundus_nodes.iter().map(|n| json!({"id": n.name, "degree": n.degree})).collect::<Vec<_>>(),
        "lipid_nodes": network
            .lipid_nodes
            .iter()
            .map(|n| json!({"id": n.name, "subclass": n.subclass, "degree": n.degree}))
            .collect::<Vec<_>>(),
        "edges": edges,
    });
    RenderedFigure {
        kind: spec.kind,
        svg: svg.finish(),
        data,
        warnings: Vec::new(),
    }
}
