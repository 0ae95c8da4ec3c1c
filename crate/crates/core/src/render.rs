//! SVG rendering of worlds and episode trajectories.

use crate::relation::Ontology;
use crate::search::EpisodeResult;
use crate::world::{Cell, GridWorld, CELL_SIZE_M};

const PX_PER_CELL: f64 = 18.0;

fn px(v: f64) -> f64 {
    v / CELL_SIZE_M * PX_PER_CELL
}

fn cell_rect(c: Cell, fill: &str) -> String {
    format!(
        r##"<rect x="{:.1}" y="{:.1}" width="{px}" height="{px}" fill="{fill}" stroke="#ccc" stroke-width="0.5"/>"##,
        c.col as f64 * PX_PER_CELL,
        c.row as f64 * PX_PER_CELL,
        px = PX_PER_CELL,
    )
}

/// Renders the grid, objects, and (optionally) an episode's trajectory and
/// detection events.
pub fn render_world_svg(
    world: &GridWorld,
    ontology: &Ontology,
    episode: Option<&EpisodeResult>,
) -> String {
    let w = world.width as f64 * PX_PER_CELL;
    let h = world.height as f64 * PX_PER_CELL;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    out.push('\n');
    out.push_str(&format!(
        r##"<rect width="{w:.0}" height="{h:.0}" fill="#fbfbf8"/>"##
    ));
    out.push('\n');
    for row in 0..world.height {
        for col in 0..world.width {
            let c = Cell::new(col, row);
            if world.is_blocked(c) {
                out.push_str(&cell_rect(c, "#5b5b5b"));
                out.push('\n');
            }
        }
    }
    for s in &world.stationary {
        for &c in &s.footprint {
            out.push_str(&cell_rect(c, "#b7834d"));
            out.push('\n');
        }
        out.push_str(&format!(
            r##"<text x="{:.1}" y="{:.1}" font-size="9" fill="#222">{}</text>"##,
            px(s.position.x) - 10.0,
            px(s.position.y) - 4.0,
            ontology.name(s.cat)
        ));
        out.push('\n');
    }
    for m in &world.movable {
        let color = if m.cat == world.target {
            "#d62728"
        } else {
            "#1f77b4"
        };
        out.push_str(&format!(
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{color}"/>"#,
            px(m.position.x),
            px(m.position.y)
        ));
        out.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-size="8" fill="{color}">{}</text>"#,
            px(m.position.x) + 5.0,
            px(m.position.y) + 3.0,
            ontology.name(m.cat)
        ));
        out.push('\n');
    }
    let start = world.start.position();
    out.push_str(&format!(
        r##"<circle cx="{:.1}" cy="{:.1}" r="5" fill="none" stroke="#2ca02c" stroke-width="2"/>"##,
        px(start.x),
        px(start.y)
    ));
    out.push('\n');
    if let Some(ep) = episode {
        let mut points = vec![format!("{:.1},{:.1}", px(start.x), px(start.y))];
        for step in &ep.trace {
            let p = step.state.position();
            points.push(format!("{:.1},{:.1}", px(p.x), px(p.y)));
        }
        out.push_str(&format!(
            r##"<polyline points="{}" fill="none" stroke="#2ca02c" stroke-width="1.5" opacity="0.8"/>"##,
            points.join(" ")
        ));
        out.push('\n');
        for step in &ep.trace {
            for d in &step.detections {
                out.push_str(&format!(
                    r##"<circle cx="{:.1}" cy="{:.1}" r="2" fill="#ff7f0e" opacity="0.6"/>"##,
                    px(d.position.x),
                    px(d.position.y)
                ));
                out.push('\n');
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::RelationGraph;
    use crate::world::{generate_world, WorldGenConfig, STATIONARY_POOL};

    #[test]
    fn svg_contains_grid_and_objects() {
        let mut onto = Ontology::new();
        for n in ["knife", "bread", "mug", "book", "apple", "fork"] {
            onto.intern(n).unwrap();
        }
        for n in STATIONARY_POOL {
            onto.intern(n).unwrap();
        }
        let mut gt = RelationGraph::new(onto.ids().collect());
        gt.set_edge(
            onto.id("knife").unwrap(),
            onto.id("countertop").unwrap(),
            true,
            9,
        );
        let world = generate_world(
            1,
            &onto,
            &gt,
            &WorldGenConfig::default(),
            onto.id("knife").unwrap(),
        )
        .unwrap();
        let svg = render_world_svg(&world, &onto, None);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("knife"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
