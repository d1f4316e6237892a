use trifst::compose3::*;
use trifst::fst::*;
use trifst::semiring::ProbabilityWeight;
type P = ProbabilityWeight;

fn main() {
    for seed in 0..10u64 {
        let t1 = random_acyclic::<P>(5, 3, 0.2, 0.5, 3100 + seed);
        let t2 = random_acyclic::<P>(5, 3, 0.2, 0.5, 3200 + seed);
        let t3 = random_acyclic::<P>(5, 3, 0.2, 0.5, 3300 + seed);
        for mode in [FilterMode::Pair, FilterMode::Single] {
            let (a, _) = compose3(&t1, &t2, &t3, Strategy::Lateral, mode);
            let (b, _) = compose3(&t1, &t2, &t3, Strategy::Central, mode);
            if a.num_states() != b.num_states() {
                println!("seed {seed} mode {mode:?}: states {} vs {}", a.num_states(), b.num_states());
                continue;
            }
            for q in 0..a.num_states() {
                if a.transitions(q) != b.transitions(q) {
                    println!("seed {seed} mode {mode:?} state {q}:");
                    let mut l1 = lazy_compose3(&t1, &t2, &t3, Strategy::Lateral, mode);
                    let mut l2 = lazy_compose3(&t1, &t2, &t3, Strategy::Central, mode);
                    let mut done = 0; while done <= q { l1.expand_state(done); l2.expand_state(done); done += 1; }
                    println!("  triple {:?} / {:?}", l1.state_triple(q), l2.state_triple(q));
                    for m in l1.expand_state(q).to_vec() { println!("  LAT {:?} e=({:?},{:?},{:?}) -> {:?}", m.mv, m.e1, m.e2, m.e3, m.transition); }
                    for m in l2.expand_state(q).to_vec() { println!("  CEN {:?} e=({:?},{:?},{:?}) -> {:?}", m.mv, m.e1, m.e2, m.e3, m.transition); }
                    return;
                }
            }
        }
    }
    println!("no diff found");
}
