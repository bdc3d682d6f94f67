fn main() {
    let t = ogi_core::types::FullTheta::simulation_default();
    let lam = 6.5/24.0;
    println!("s(0.4) = {:.20e}", ogi_core::theory::nu_variance_factor(0.4));
    println!("cond_var_h = {:.20e}", ogi_core::theory::cond_var_h(&t, lam).unwrap());
    println!("want       = 5.774368625333099313e-4");
    let c = ogi_core::theory::cond_var_coefficients(&t, lam).unwrap();
    println!("F1={:.15} F2={:.15} F3={:.15} nuLg={:.15e}", c.f1, c.f2, c.f3, c.nu_l_g);
}
