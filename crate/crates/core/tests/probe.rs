// Temporary exploration harness (removed before release).
use nalgebra::Vector3;
use superlattice::atoms::AtomSpecies;
use superlattice::lattice::{analyze_landscape, CriticalKind};
use superlattice::presets::*;
use superlattice::shift::{ShiftEvaluator, ShiftMode};

fn report(name: &str, species: &AtomSpecies, out: &superlattice::presets::PresetOutput, n: usize) {
    let eval = ShiftEvaluator::new(species, &out.state, &out.groups, ShiftMode::E2PlusEpsilon)
        .expect("evaluator");
    let f = |r: &Vector3<f64>| eval.potential(r);
    println!("==== {name} ====");
    println!(
        "cell a1=({:.4e},{:.4e}) a2=({:.4e},{:.4e}) origin=({:.4e},{:.4e})",
        out.cell.a1.x, out.cell.a1.y, out.cell.a2.x, out.cell.a2.y, out.cell.origin.x, out.cell.origin.y
    );
    println!("adjacency_radius = {:.4e}", out.adjacency_radius);
    for (l, p) in &out.anchors {
        println!("  anchor {l}: ({:.4e}, {:.4e})  U={:.6e}", p.x, p.y, f(p));
    }
    match analyze_landscape(&f, &out.cell, &out.anchors, out.adjacency_radius, n) {
        Ok(rep) => {
            println!("geometry = {:?}", rep.geometry);
            let range = rep.grid.range();
            println!("grid range = {range:.6e}");
            for p in &rep.points {
                println!(
                    "  {:?} {:?} at ({:.5e}, {:.5e})  U = {:.9e}",
                    p.kind, p.label, p.position.x, p.position.y, p.value
                );
            }
            for b in &rep.barriers {
                let la = rep.points[b.site_a].label.clone().unwrap_or("?".into());
                let lb = rep.points[b.site_b].label.clone().unwrap_or("?".into());
                println!(
                    "  bond {la}-{lb} off={:?} d={:.4e} height={:.6e} rel={:.4}",
                    b.image_offset,
                    b.distance,
                    b.height(),
                    b.height() / range
                );
            }
            let minima: Vec<_> = rep
                .points
                .iter()
                .filter(|p| p.kind == CriticalKind::Minimum)
                .collect();
            println!("minima count = {}", minima.len());
        }
        Err(e) => println!("ANALYSIS ERROR: {e}"),
    }
}

#[test]
#[ignore]
fn probe_hex_double_well() {
    let species = AtomSpecies::rubidium87();
    for (tag, dphi) in [
        ("dphi1=pi", [std::f64::consts::PI, 0.0, 0.0]),
        ("dphi2=pi", [0.0, std::f64::consts::PI, 0.0]),
        ("dphi3=pi", [0.0, 0.0, std::f64::consts::PI]),
    ] {
        let params = HexDoubleWellParams {
            delta_phi: dphi,
            ..Default::default()
        };
        let out = hexagonal_double_well(&species, &params).expect("preset");
        report(&format!("hex_dw {tag}"), &species, &out, 96);
    }
}

#[test]
#[ignore]
fn probe_square() {
    let species = AtomSpecies::rubidium87();
    let params = SquareParams::default();
    let out = isolated_square(&species, &params).expect("preset");
    report("square symmetric", &species, &out, 96);

    let params = SquareParams {
        phi: [0.0, -0.2 * std::f64::consts::PI],
        ..Default::default()
    };
    let out = isolated_square(&species, &params).expect("preset");
    report("square theta2-phi2=0.2pi", &species, &out, 96);
}

#[test]
#[ignore]
fn probe_triangular() {
    let species = AtomSpecies::rubidium87();
    let params = TriangularParams::default();
    let out = isolated_triangular(&species, &params).expect("preset");
    report("triangular symmetric", &species, &out, 96);

    let params = TriangularParams {
        delta_phi: [0.3, 0.0, 0.0],
        ..Default::default()
    };
    let out = isolated_triangular(&species, &params).expect("preset");
    report("triangular dphi1=+0.3", &species, &out, 96);
}

#[test]
#[ignore]
fn probe_hexagonal() {
    let species = AtomSpecies::rubidium87();
    let params = HexagonalParams::default();
    let out = isolated_hexagonal(&species, &params).expect("preset");
    report("hexagonal symmetric", &species, &out, 96);
}

#[test]
#[ignore]
fn probe_controls() {
    let species = AtomSpecies::rubidium87();

    // hex double well with all dphi = 0: degenerate triangular lattice.
    let params = HexDoubleWellParams {
        delta_phi: [0.0; 3],
        ..Default::default()
    };
    let out = hexagonal_double_well(&species, &params).expect("preset");
    report("hex_dw all-zero", &species, &out, 96);

    // hex double well tilt: dphi1 = pi +- 0.2.
    for sign in [1.0_f64, -1.0] {
        let params = HexDoubleWellParams {
            delta_phi: [std::f64::consts::PI + 0.2 * sign, 0.0, 0.0],
            ..Default::default()
        };
        let out = hexagonal_double_well(&species, &params).expect("preset");
        let eval =
            ShiftEvaluator::new(&species, &out.state, &out.groups, ShiftMode::E2PlusEpsilon)
                .unwrap();
        let f = |r: &Vector3<f64>| eval.potential(r);
        let rep = analyze_landscape(&f, &out.cell, &out.anchors, out.adjacency_radius, 96)
            .expect("analysis");
        let ua = rep.depth("A").expect("A");
        let uf = rep.depth("F").expect("F");
        println!(
            "tilt sign {sign}: U_F - U_A = {:.6e} (range {:.3e}) geometry {:?}",
            uf - ua,
            rep.grid.range(),
            rep.geometry
        );
    }

    // Hexagonal with the primed set off: plain triangular lattice.
    let params = HexagonalParams {
        i_prime: 0.0,
        ..Default::default()
    };
    let out = isolated_hexagonal(&species, &params).expect("preset");
    report("hexagonal i_prime=0", &species, &out, 96);

    // Triangular small tilts of either sign.
    for dphi in [0.08_f64, -0.08] {
        let params = TriangularParams {
            delta_phi: [dphi, 0.0, 0.0],
            ..Default::default()
        };
        let out = isolated_triangular(&species, &params).expect("preset");
        let eval =
            ShiftEvaluator::new(&species, &out.state, &out.groups, ShiftMode::E2PlusEpsilon)
                .unwrap();
        let f = |r: &Vector3<f64>| eval.potential(r);
        let rep = analyze_landscape(&f, &out.cell, &out.anchors, out.adjacency_radius, 96)
            .expect("analysis");
        println!(
            "triangular dphi1={dphi}: U_A-U_B = {:.4e}, U_A-U_C = {:.4e}, U_B-U_C = {:.4e}, geometry {:?}",
            rep.depth("A").unwrap() - rep.depth("B").unwrap(),
            rep.depth("A").unwrap() - rep.depth("C").unwrap(),
            rep.depth("B").unwrap() - rep.depth("C").unwrap(),
            rep.geometry
        );
    }

    // Square: shift d1 by lambda/7 and watch the minima translate.
    let lambda = 1064.0e-9;
    let base = isolated_square(&species, &SquareParams::default()).expect("preset");
    let shifted = isolated_square(
        &species,
        &SquareParams {
            d: [lambda / 7.0, 0.0],
            ..Default::default()
        },
    )
    .expect("preset");
    for (tag, out) in [("base", &base), ("d1+L/7", &shifted)] {
        let eval =
            ShiftEvaluator::new(&species, &out.state, &out.groups, ShiftMode::E2PlusEpsilon)
                .unwrap();
        let f = |r: &Vector3<f64>| eval.potential(r);
        let rep = analyze_landscape(&f, &out.cell, &out.anchors, out.adjacency_radius, 96)
            .expect("analysis");
        print!("square {tag} minima:");
        for p in rep.points.iter().filter(|p| p.kind == CriticalKind::Minimum) {
            print!(" ({:.5e},{:.5e})", p.position.x, p.position.y);
        }
        println!();
    }
}
