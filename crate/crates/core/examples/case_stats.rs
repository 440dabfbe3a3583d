use parsikern::bounds::greedy_leg_disjoint;
use parsikern::generate::gen_random_pair;
fn main() {
    for maxn in [12usize, 16, 20, 24, 32, 48] {
        let mut fails = 0;
        let trials = 20000u64;
        for seed in 0..trials {
            let n = 4 + (seed as usize % (maxn - 3));
            let (a, b) = gen_random_pair(n, 1 + (seed % 9) as usize, seed).unwrap();
            if greedy_leg_disjoint(&a, &b).is_err() { fails += 1; if fails == 1 { eprintln!("first maxn {maxn} seed {seed} n {n}"); } }
        }
        println!("n<={maxn}: {fails}/{trials}");
    }
}
