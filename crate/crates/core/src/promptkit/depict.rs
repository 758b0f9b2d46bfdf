use std::f64::consts::PI;
use std::fmt::Write;

use crate::molgraph::{BondOrder, Element, MoleculeGraph};

/// Drawn bond length in SVG user units.
pub const BOND_LENGTH: f64 = 40.0;
const MARGIN: f64 = 30.0;
const DOUBLE_OFFSET: f64 = 4.0;

type Point = (f64, f64);

fn angle(from: Point, to: Point) -> f64 {
    (to.1 - from.1).atan2(to.0 - from.0)
}

fn step(p: Point, theta: f64, len: f64) -> Point {
    (p.0 + len * theta.cos(), p.1 + len * theta.sin())
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

struct Layout<'a> {
    g: &'a MoleculeGraph,
    pos: Vec<Option<Point>>,
    // side of the last zigzag turn, per atom
    turn: Vec<f64>,
}

impl<'a> Layout<'a> {
    fn placed_neighbors(&self, u: usize) -> Vec<usize> {
        self.g
            .neighbors(u)
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| self.pos[v].is_some())
            .collect()
    }

    fn p(&self, i: usize) -> Point {
        self.pos[i].expect("placed")
    }

    /// Places a ring that has no placed atoms besides `u`, or shares exactly
    /// one placed edge with earlier rings.
    fn place_ring(&mut self, ring: &[usize]) {
        let k = ring.len();
        let placed: Vec<usize> = (0..k).filter(|&i| self.pos[ring[i]].is_some()).collect();
        let delta = 2.0 * PI / k as f64;
        let radius = BOND_LENGTH / (2.0 * (PI / k as f64).sin());
        match placed.as_slice() {
            [i] => {
                let u = ring[*i];
                let pu = self.p(u);
                let others = self.placed_neighbors(u);
                let away = if others.is_empty() {
                    -PI / 2.0
                } else {
                    let (sx, sy) = others.iter().fold((0.0, 0.0), |(x, y), &v| {
                        let a = angle(pu, self.p(v));
                        (x + a.cos(), y + a.sin())
                    });
                    sy.atan2(sx) + PI
                };
                let c = step(pu, away, radius);
                let start = angle(c, pu);
                for j in 1..k {
                    self.pos[ring[(i + j) % k]] = Some(step(c, start + j as f64 * delta, radius));
                }
            }
            [i0, i1] if i1 - i0 == 1 || (*i0 == 0 && *i1 == k - 1) => {
                // walk forward from b, away from a
                let (ia, ib) = if i1 - i0 == 1 { (*i0, *i1) } else { (*i1, *i0) };
                let (a, b) = (self.p(ring[ia]), self.p(ring[ib]));
                let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
                let normal = angle(a, b) + PI / 2.0;
                let apothem = radius * (PI / k as f64).cos();
                let crowd: Vec<Point> = [ring[ia], ring[ib]]
                    .iter()
                    .flat_map(|&x| self.placed_neighbors(x))
                    .filter(|&v| v != ring[ia] && v != ring[ib])
                    .map(|v| self.p(v))
                    .collect();
                let c1 = step(mid, normal, apothem);
                let c2 = step(mid, normal + PI, apothem);
                let spread = |c: Point| -> f64 {
                    crowd
                        .iter()
                        .map(|q| (q.0 - c.0).hypot(q.1 - c.1))
                        .fold(f64::INFINITY, f64::min)
                };
                let c = if crowd.is_empty() || spread(c1) >= spread(c2) { c1 } else { c2 };
                let (ba, bb) = (angle(c, a), angle(c, b));
                let t = if (wrap(bb - ba) - delta).abs() < 1e-6 { 1.0 } else { -1.0 };
                for j in 1..k - 1 {
                    let idx = (ib + j) % k;
                    self.pos[ring[idx]] = Some(step(c, bb + t * j as f64 * delta, radius));
                }
            }
            _ => {}
        }
    }

    fn place_children(&mut self, u: usize) -> Vec<usize> {
        let pu = self.p(u);
        let fresh: Vec<usize> = self
            .g
            .neighbors(u)
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| self.pos[v].is_none())
            .collect();
        if fresh.is_empty() {
            return fresh;
        }
        let used: Vec<f64> = self.placed_neighbors(u).iter().map(|&v| angle(pu, self.p(v))).collect();
        let s = -self.turn[u];
        let dirs: Vec<f64> = match used.as_slice() {
            [] => (0..fresh.len())
                .map(|j| -PI / 6.0 + j as f64 * 2.0 * PI / fresh.len().max(3) as f64)
                .collect(),
            [phi] => {
                let base = [phi + s * 2.0 * PI / 3.0, phi - s * 2.0 * PI / 3.0, phi + PI];
                if fresh.len() <= 3 {
                    base[..fresh.len()].to_vec()
                } else {
                    let d = 2.0 * PI / (fresh.len() + 1) as f64;
                    (1..=fresh.len()).map(|j| phi + j as f64 * d).collect()
                }
            }
            many => {
                // split the widest free gap
                let mut a: Vec<f64> = many.iter().map(|x| wrap(*x)).collect();
                a.sort_by(f64::total_cmp);
                let (mut lo, mut gap) = (a[a.len() - 1], a[0] + 2.0 * PI - a[a.len() - 1]);
                for w in a.windows(2) {
                    if w[1] - w[0] > gap {
                        gap = w[1] - w[0];
                        lo = w[0];
                    }
                }
                let d = gap / (fresh.len() + 1) as f64;
                (1..=fresh.len()).map(|j| lo + j as f64 * d).collect()
            }
        };
        for (&v, &theta) in fresh.iter().zip(&dirs) {
            self.pos[v] = Some(step(pu, theta, BOND_LENGTH));
            self.turn[v] = if used.len() == 1 && fresh.len() <= 3 { s } else { 1.0 };
        }
        fresh
    }

    fn run(mut self) -> Vec<Point> {
        let g = self.g;
        let mut offset_x = 0.0;
        for root in 0..g.atom_count() {
            if self.pos[root].is_some() {
                continue;
            }
            self.pos[root] = Some((0.0, 0.0));
            let mut component = vec![root];
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                let mut new = Vec::new();
                for ring in g.rings().iter().filter(|r| r.contains(&u)) {
                    let before: Vec<bool> = ring.iter().map(|&a| self.pos[a].is_some()).collect();
                    self.place_ring(ring);
                    new.extend(ring.iter().zip(before).filter(|&(&a, was)| !was && self.pos[a].is_some()).map(|(&a, _)| a));
                }
                new.extend(self.place_children(u));
                component.extend(&new);
                new.sort_unstable();
                stack.extend(new.into_iter().rev());
            }
            let min_x = component.iter().map(|&i| self.p(i).0).fold(f64::INFINITY, f64::min);
            let max_x = component.iter().map(|&i| self.p(i).0).fold(f64::NEG_INFINITY, f64::max);
            for &i in &component {
                let (x, y) = self.p(i);
                self.pos[i] = Some((x - min_x + offset_x, y));
            }
            offset_x += max_x - min_x + 2.0 * BOND_LENGTH;
        }
        self.pos.into_iter().map(|p| p.expect("all placed")).collect()
    }
}

/// 2D coordinates in SVG units, before margin translation.
pub(crate) fn layout(g: &MoleculeGraph) -> Vec<Point> {
    Layout {
        g,
        pos: vec![None; g.atom_count()],
        turn: vec![1.0; g.atom_count()],
    }
    .run()
}

fn charge_suffix(q: i8) -> String {
    match q {
        0 => String::new(),
        1 => "+".into(),
        -1 => "-".into(),
        q if q > 0 => format!("{q}+"),
        q => format!("{}-", -q),
    }
}

/// Carbons are drawn implicitly unless isolated, charged or isotopic;
/// an isolated carbon is labelled with its hydrogens ("CH4").
fn atom_label(g: &MoleculeGraph, i: usize) -> Option<String> {
    let a = g.atom(i);
    let isolated = g.degree(i) == 0;
    if a.element == Element::C && !isolated && a.formal_charge == 0 && a.isotope.is_none() {
        return None;
    }
    let mut s = String::new();
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(a.element.symbol());
    match g.total_hydrogens(i) {
        0 => {}
        1 => s.push('H'),
        n => {
            s.push('H');
            s.push_str(&n.to_string());
        }
    }
    s.push_str(&charge_suffix(a.formal_charge));
    Some(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn line(out: &mut String, a: Point, b: Point, extra: &str) {
    let _ = writeln!(
        out,
        "<line x1=\"{:.7}\" y1=\"{:.7}\" x2=\"{:.7}\" y2=\"{:.7}\"{extra}/>",
        a.0, a.1, b.0, b.1
    );
}

/// Minimal 2D depiction. One `<g class="bond">` per bond, one
/// `<g class="atom">` per atom carrying its coordinates and, for
/// non-implicit atoms, a text label.
pub fn depict_svg(g: &MoleculeGraph) -> String {
    let raw = layout(g);
    let (min_x, min_y) = raw
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |(x, y), p| (x.min(p.0), y.min(p.1)));
    let pts: Vec<Point> = raw
        .iter()
        .map(|p| (p.0 - min_x + MARGIN, p.1 - min_y + MARGIN))
        .collect();
    let (w, h) = pts.iter().fold((0.0f64, 0.0f64), |(w, h), p| (w.max(p.0), h.max(p.1)));
    let (w, h) = if pts.is_empty() {
        (2.0 * MARGIN, 2.0 * MARGIN)
    } else {
        (w + MARGIN, h + MARGIN)
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.7}\" height=\"{h:.7}\" viewBox=\"0 0 {w:.7} {h:.7}\">"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str("<g stroke=\"black\" stroke-width=\"1.5\">\n");
    for (bi, bond) in g.bonds().iter().enumerate() {
        let _ = writeln!(out, "<g class=\"bond\" data-bond=\"{bi}\" data-a=\"{}\" data-b=\"{}\">", bond.a, bond.b);
        let (a, b) = (pts[bond.a], pts[bond.b]);
        let n = angle(a, b) + PI / 2.0;
        let shift = |p: Point, d: f64| step(p, n, d);
        match bond.order {
            BondOrder::Single => line(&mut out, a, b, ""),
            BondOrder::Double => {
                line(&mut out, shift(a, DOUBLE_OFFSET / 2.0), shift(b, DOUBLE_OFFSET / 2.0), "");
                line(&mut out, shift(a, -DOUBLE_OFFSET / 2.0), shift(b, -DOUBLE_OFFSET / 2.0), "");
            }
            BondOrder::Triple => {
                line(&mut out, a, b, "");
                line(&mut out, shift(a, DOUBLE_OFFSET), shift(b, DOUBLE_OFFSET), "");
                line(&mut out, shift(a, -DOUBLE_OFFSET), shift(b, -DOUBLE_OFFSET), "");
            }
            BondOrder::Aromatic => {
                line(&mut out, a, b, "");
                line(
                    &mut out,
                    shift(a, DOUBLE_OFFSET),
                    shift(b, DOUBLE_OFFSET),
                    " stroke-dasharray=\"3,2\"",
                );
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n");
    out.push_str("<g font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">\n");
    for (i, p) in pts.iter().enumerate() {
        match atom_label(g, i) {
            Some(label) => {
                let _ = writeln!(
                    out,
                    "<g class=\"atom\" data-atom=\"{i}\" data-x=\"{:.7}\" data-y=\"{:.7}\"><circle cx=\"{:.7}\" cy=\"{:.7}\" r=\"8\" fill=\"white\"/><text x=\"{:.7}\" y=\"{:.7}\" dy=\"4\">{}</text></g>",
                    p.0, p.1, p.0, p.1, p.0, p.1, xml_escape(&label)
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "<g class=\"atom\" data-atom=\"{i}\" data-x=\"{:.7}\" data-y=\"{:.7}\"/>",
                    p.0, p.1
                );
            }
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
