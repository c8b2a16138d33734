//! Forward kinematics and the tip Jacobian of the default arm.

use wavearm::kinematics::{forward_kinematics, jacobian, segment_tips, BasePose, SegmentGeometry};

fn main() -> wavearm::Result<()> {
    let geom = SegmentGeometry::default();
    let base = BasePose::default();
    let q = [0.6, -0.4, 1.1];

    for (i, tip) in segment_tips(&q, &base, &geom).iter().enumerate() {
        println!("segment {} tip: ({:+.4}, {:+.4}) m", i + 1, tip.x, tip.y);
    }
    let mid = forward_kinematics(&q, 2, 0.5, &base, &geom)?;
    println!(
        "midpoint of segment 2: ({:+.4}, {:+.4}) m, tangent {:+.4} rad",
        mid.position.x, mid.position.y, mid.tangent
    );
    let j = jacobian(&q, 3, 1.0, &base, &geom)?;
    println!("tip Jacobian (rows x, z):{j:.4}");
    Ok(())
}
