mod common;

use crystal_rigidity::cli::{run, EXIT_INCONSISTENT, EXIT_OK};
use crystal_rigidity::linalg::SubspaceBasis;
use crystal_rigidity::rigidity::{
    build_matrices, decode_raw, encode_raw, flex_space, rigid_motion_space, AffineVelocity,
};
use crystal_rigidity::{
    analyze_counts, builtin_framework, character_row, commutant_basis, edge_deviation,
    symmetry_counts, verify_symmetry_equation, Framework, Space, Symmetry, BUILTIN_NAMES,
};
use nalgebra::{DMatrix, DVector};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn builtin(name: &str) -> Framework {
    builtin_framework(name).expect("builtin")
}

fn kagome_strict() -> Outcome {
    let c = analyze_counts(&builtin("kagome"), &Space::zero(2)).map_err(|e| e.to_string())?;
    check(
        (c.s, c.m, c.f) == (3, 1, 2),
        format!("got s={} m={} f={}", c.s, c.m, c.f),
    )?;
    check(c.identity_residual == 0, "nonzero residual")?;
    Ok(format!("s={} m={} f={}", c.s, c.m, c.f))
}

fn kagome_affine() -> Outcome {
    let c = analyze_counts(&builtin("kagome"), &Space::full(2)).map_err(|e| e.to_string())?;
    check(
        (c.s, c.m, c.f) == (0, 1, 3),
        format!("got s={} m={} f={}", c.s, c.m, c.f),
    )?;
    check(
        (c.vertex_dofs, c.dim_e, c.edge_classes) == (6, 4, 6) && c.rhs() == 1,
        format!("rhs {}", c.rhs()),
    )?;
    check(c.identity_residual == 0, "nonzero residual")?;
    Ok(format!("{} - {} = 6 + 4 - 6 - 3, residual 0", c.m, c.s))
}

fn kagome_rotation_counts() -> Outcome {
    let k = builtin("kagome");
    let g = k.symmetry("C3").ok_or("C3 not declared")?;
    let r = symmetry_counts(&k, g).map_err(|e| e.to_string())?;
    let got = (
        r.dim_f_g,
        r.dim_e_g,
        r.e_g,
        r.f_g,
        r.m_g,
        r.s_g,
        r.identity_residual,
    );
    check(got == (2, 2, 2, 1, 1, 0, 0), format!("got {got:?}"))?;
    Ok("dim F_g=2 dim E_g=2 e_g=2 f_g=1 m_g=1 s_g=0 residual 0".into())
}

fn hexahedron_strict() -> Outcome {
    let h = builtin("hexahedron");
    let m = build_matrices(&h).map_err(|e| e.to_string())?;
    check(
        m.strict.shape() == (9, 6),
        format!("R is {:?}", m.strict.shape()),
    )?;
    check(
        m.full().shape() == (9, 15),
        format!("[R X] is {:?}", m.full().shape()),
    )?;
    let c = analyze_counts(&h, &Space::zero(3)).map_err(|e| e.to_string())?;
    check(
        (c.m, c.s, c.f) == (0, 6, 3),
        format!("got m={} s={} f={}", c.m, c.s, c.f),
    )?;
    let flex = flex_space(&h, &Space::zero(3)).map_err(|e| e.to_string())?;
    let rigid = rigid_motion_space(&h, &Space::zero(3)).map_err(|e| e.to_string())?;
    check(
        flex.contains(&rigid) && rigid.contains(&flex),
        "flexes are not the translations",
    )?;
    check(c.identity_residual == 0, "nonzero residual")?;
    Ok("shapes 9x6, 9x15; flexes = translations; s=6".into())
}

fn symmetry_equations() -> Outcome {
    let mut worst = 0f64;
    let mut pairs = 0;
    for name in BUILTIN_NAMES {
        let fw = builtin(name);
        for g in fw.symmetries() {
            let r = verify_symmetry_equation(&fw, g, None).map_err(|e| e.to_string())?;
            check(r < 1e-9, format!("{name}/{}: residual {r:e}", g.name()))?;
            worst = worst.max(r);
            pairs += 1;
        }
    }
    check(pairs >= 2, "too few declared symmetries")?;
    Ok(format!("{pairs} pairs, max residual {worst:.1e}"))
}

fn character_identity() -> Outcome {
    let k = builtin("kagome");
    let g = k.symmetry("C3").ok_or("C3 not declared")?;
    let e_g = commutant_basis(g.linear(), k.tol());
    let mut worst = 0f64;
    for h in [Symmetry::identity(&k), g.clone()] {
        let row = character_row(&k, &h, &e_g).map_err(|e| e.to_string())?;
        check(
            row.residual < 1e-9,
            format!("{}: residual {:e}", h.name(), row.residual),
        )?;
        worst = worst.max(row.residual);
    }
    Ok(format!("identity and C3 on E_g, max residual {worst:.1e}"))
}

fn quadratic_deviation() -> Outcome {
    let k = builtin("kagome");
    let full = Space::full(2);
    let flex = flex_space(&k, &full).map_err(|e| e.to_string())?;
    let mut translations = DMatrix::zeros(flex.ambient_dim(), 2);
    for i in 0..2 {
        let mut c = DVector::zeros(2);
        c[i] = 1.0;
        translations.set_column(i, &encode_raw(&k, &AffineVelocity::translation(&c, 3)));
    }
    let moving = flex.orthogonal_complement_within(&SubspaceBasis::span_of(&translations, k.tol()));
    check(
        moving.dim() == 2,
        format!("expected rotation and mechanism, got {}", moving.dim()),
    )?;
    let mut ratios = Vec::new();
    for col in moving.basis().column_iter() {
        let x = decode_raw(&k, &col.into_owned());
        let q2 = edge_deviation(&k, &x, 1e-2).map_err(|e| e.to_string())? / 1e-4;
        let q3 = edge_deviation(&k, &x, 1e-3).map_err(|e| e.to_string())? / 1e-6;
        check(
            q2 > 1e-6 && q3 > 1e-6,
            format!("degenerate quadratic term {q2:e} {q3:e}"),
        )?;
        let ratio = q2 / q3;
        check((1.0 / 1.5..=1.5).contains(&ratio), format!("ratio {ratio}"))?;
        ratios.push(ratio);
    }
    // A vertex velocity with no component in the flex space.
    let probe = DVector::from_fn(flex.ambient_dim(), |i, _| {
        if i < 6 {
            ((i + 1) as f64).sin()
        } else {
            0.0
        }
    });
    let off = &probe - flex.projector() * &probe;
    let bad = decode_raw(&k, &(moving.basis().column(1) + off * 0.5));
    let first_order = edge_deviation(&k, &bad, 1e-3).map_err(|e| e.to_string())? / 1e-3;
    check(
        first_order > 1e-3,
        format!("non-flex deviation/t = {first_order:e}"),
    )?;
    Ok(format!(
        "ratios {:.4} {:.4}; non-flex deviation/t = {first_order:.3}",
        ratios[0], ratios[1]
    ))
}

fn torus_oracle() -> Outcome {
    for name in BUILTIN_NAMES {
        let fw = builtin(name);
        let r = build_matrices(&fw).map_err(|e| e.to_string())?.strict;
        check(
            common::equal_up_to_row_permutation_and_sign(&common::torus_matrix(&fw), &r, 1e-12),
            format!("{name}: mismatch"),
        )?;
    }
    let mut runner = TestRunner::new(Config {
        cases: 128,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&common::framework_strategy(), |fw| {
            let r = build_matrices(&fw).unwrap().strict;
            proptest::prop_assert!(common::equal_up_to_row_permutation_and_sign(
                &common::torus_matrix(&fw),
                &r,
                1e-12
            ));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("3 built-ins and 128 random frameworks".into())
}

fn supercell_consistency() -> Outcome {
    let sc = builtin("kagome")
        .supercell(&[2, 2])
        .map_err(|e| e.to_string())?;
    let c = analyze_counts(&sc, &Space::zero(2)).map_err(|e| e.to_string())?;
    check(
        c.identity_residual == 0,
        format!("residual {}", c.identity_residual),
    )?;
    check(c.m >= 1, format!("m = {}", c.m))?;
    Ok(format!(
        "|Fv|={} |Fe|={} m={} s={} f={}",
        c.vertex_classes, c.edge_classes, c.m, c.s, c.f
    ))
}

fn determinism_and_exit_codes() -> Outcome {
    let modes: &[&[&str]] = &[
        &[],
        &["--mode", "strict"],
        &["--mode", "affine"],
        &["--mode", "space", "zero"],
        &["--mode", "space", "full"],
        &["--mode", "space", "symmetric"],
        &["--mode", "space", "skew"],
        &["--mode", "space", "diagonal"],
    ];
    let mut runs = 0;
    for name in BUILTIN_NAMES {
        for mode in modes {
            let mut argv = vec!["crystal-rigidity", "analyze", "--builtin", name, "--json"];
            argv.extend_from_slice(mode);
            let a = run(&argv);
            let b = run(&argv);
            check(
                a.code != EXIT_INCONSISTENT,
                format!("exit 3 for {argv:?}: {}", a.stderr),
            )?;
            check(
                a.code == EXIT_OK,
                format!("exit {} for {argv:?}: {}", a.code, a.stderr),
            )?;
            check(a.stdout == b.stdout, format!("output differs for {argv:?}"))?;
            runs += 1;
        }
        let argv = [
            "crystal-rigidity",
            "symmetry",
            "--builtin",
            name,
            "--characters",
            "--json",
        ];
        let a = run(argv);
        check(
            a.code == EXIT_OK,
            format!("exit {} for {argv:?}: {}", a.code, a.stderr),
        )?;
        check(
            a.stdout == run(argv).stdout,
            format!("output differs for {argv:?}"),
        )?;
        runs += 1;
    }
    Ok(format!("{runs} command lines, byte-identical, no exit 3"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("kagome strict counts", kagome_strict),
        ("kagome affine counts", kagome_affine),
        ("kagome 3-fold rotation counts", kagome_rotation_counts),
        ("hexahedron strict rigidity", hexahedron_strict),
        ("symmetry equations", symmetry_equations),
        ("character identity", character_identity),
        ("quadratic edge deviation", quadratic_deviation),
        ("torus oracle", torus_oracle),
        ("supercell consistency", supercell_consistency),
        ("determinism and exit codes", determinism_and_exit_codes),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
