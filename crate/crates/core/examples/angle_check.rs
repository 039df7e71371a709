// quick check binary
fn main() {
    let text = std::fs::read_to_string("configs/case_study.toml").unwrap();
    let net = zshift_core::network::parse_network(&text).unwrap();
    let flow = zshift_core::network::fundamental_flow(&net, 1e-12, 200).unwrap();
    for n in ["interface", "n1", "n2", "n5", "n3", "n4"] {
        println!("{n:10} |V| = {:8.2} V   θ = {:7.3}°", flow.voltage(n).unwrap().norm(), flow.theta(n).unwrap().to_degrees());
    }
    println!("iterations: {}, residual: {:.2e}", flow.iterations, flow.residual);
}
