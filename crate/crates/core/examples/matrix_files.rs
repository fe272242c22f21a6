//! Writing an instance as JSRB files, reading it back, and solving from the
//! files as an externally supplied problem would be.

use jointrecon::io::{load_instance, read_matrix, write_instance, AnyInstance, InstanceSource};
use jointrecon::joint::{solve_joint, JointConfig};
use jointrecon::testbed::{generate_instance, PhantomSpec};
use jointrecon::{KaczmarzSchedule, RegParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("jointrecon-matrix-files");
    let instance = generate_instance(20, 0.03, 7, &PhantomSpec::default_for(20))?;
    for path in write_instance(&instance, &dir)? {
        let m = read_matrix(&path)?;
        let bytes = std::fs::metadata(&path)?.len();
        println!("{:<40} {:?} {} bytes complex={}", path.display(), m.shape(), bytes, m.is_complex());
    }

    let source = InstanceSource::Files {
        s_mod: dir.join("s_mod.jsrb"),
        s_calib: dir.join("s_calib.jsrb"),
        q: dir.join("q.jsrb"),
        u: dir.join("u.jsrb"),
        s_true: Some(dir.join("s_true.jsrb")),
        c_true: Some(dir.join("c_true.jsrb")),
    };
    let AnyInstance::Real(loaded) = load_instance(&source)? else {
        unreachable!("real files")
    };
    assert_eq!(loaded.s_mod, instance.s_mod);

    let schedule = KaczmarzSchedule { outer_iterations: 20, ..KaczmarzSchedule::ACADEMIC };
    let params = RegParams::new(3e-5, 2.5e-4, 0.25, 1.0)?;
    let out = solve_joint(&loaded, &params, &JointConfig::new(schedule))?;
    println!("\nl2 error after {} outer iterations: {:.4}", out.history.len(), out.history.last().and_then(|r| r.l2_error).unwrap_or(f64::NAN));
    Ok(())
}
