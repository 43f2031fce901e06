//! The loss family on one hand-built instance over `{0,1}²`.

use invopt::losses::{asl, asl_hinge, gpl, suboptimality};
use invopt::model::{binary_points, IdentityFeatures};
use invopt::{Budget, DistanceFn, IOInstance, Response};

fn main() -> invopt::Result<()> {
    let set: Vec<Response> = binary_points(2).map(Response::discrete).collect();
    let inst = IOInstance::finite(set, Response::discrete(vec![1, 0]));
    let phi = IdentityFeatures::new(2);
    let exact = Budget::exact();
    println!("{:>16} {:>10} {:>10} {:>10} {:>10}", "theta", "subopt", "asl(l1)", "hinge", "gpl");
    for theta in [[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0], [1.0, -1.0]] {
        let d = DistanceFn::l1();
        println!(
            "{:>16} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            format!("{theta:?}"),
            suboptimality(&theta, &inst, &phi, &exact)?.value,
            asl(&theta, &inst, &phi, &d, &exact)?.value,
            asl_hinge(&theta, &inst, &phi, &d, &exact)?.value,
            gpl(&theta, &inst, &phi, &d)?,
        );
    }
    // A node cap returns a lower estimate together with a bound on the gap.
    let capped = asl(&[1.0, -1.0], &inst, &phi, &DistanceFn::l1(), &Budget::nodes(2))?;
    println!("capped asl {:.3} (gap <= {:.3})", capped.value, capped.eps_bound);
    Ok(())
}
