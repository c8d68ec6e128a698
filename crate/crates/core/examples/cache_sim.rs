//! Feeds a few traces through small caches and prints the counters.

use isocache::cache::{run_trace, CacheConfig, CacheState};

fn main() {
    let direct = CacheConfig::direct_mapped(1, 4).unwrap();
    // 0 and 4 share set 0 and evict each other
    let stats = run_trace(direct, [0, 4, 0, 4, 1, 2, 3]);
    println!("direct-mapped (1,1,4): {stats:?}");

    let two_way = CacheConfig::new(2, 1, 4).unwrap();
    let stats = run_trace(two_way, [0, 4, 0, 4, 1, 2, 3]);
    println!("2-way (2,1,4):         {stats:?}");

    let lines = CacheConfig::new(2, 4, 32).unwrap();
    let mut cache = CacheState::new(lines);
    for a in (0..64).chain(0..16) {
        cache.access(a);
    }
    println!("2-way, 4-word lines, 64 words then 16 again: {:?}", cache.stats());
    println!("set 0 holds lines {:?} (most recent first)", cache.set_contents(0));
}
