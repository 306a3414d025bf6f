//! Quaternion products, the Rodrigues map and the double cover.

use inertial_attitude::so3::{quat_conj, quat_mul, rodrigues, skew, UnitQuaternion, Vec3};

fn main() {
    let q = UnitQuaternion::from_array([0.8, 0.0, 0.0, 0.6]).expect("unit");
    let r = rodrigues(&q);
    println!("Q = {:?}", q.to_array());
    println!("R(Q) rows:");
    for row in r.matrix().m {
        println!("  {row:>8.4?}");
    }
    println!("R(Q) == R(-Q): {}", r.matrix().max_abs_diff(&rodrigues(&q.negate()).matrix()) == 0.0);

    let p = UnitQuaternion::from_euler_xyz_degrees([30.0, 10.0, 45.0]);
    println!("Euler [30, 10, 45] deg -> {:.5?}", p.to_array());
    let composed = rodrigues(&quat_mul(&p, &q)).matrix();
    let product = rodrigues(&p).matrix() * r.matrix();
    println!("R(P ⊙ Q) - R(P) R(Q): {:.1e}", composed.max_abs_diff(&product));
    println!("Q ⊙ Q⁻¹ = {:?}", quat_mul(&q, &quat_conj(&q)).to_array());

    let (x, y) = (Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0));
    println!("S(x) y = {:?}, x × y = {:?}", (skew(x) * y).to_array(), x.cross(&y).to_array());
    let b = r.inverse_rotate(Vec3::new(1.0, 0.0, 1.0));
    println!("body vector Rᵀ[1, 0, 1] = {:.4?}", b.to_array());
}
