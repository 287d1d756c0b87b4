use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use docseek_bench::netflix_outline;
use docseek_core::toolkit::{render_search, search};

fn bench_search(c: &mut Criterion) {
    let outline = netflix_outline();
    let mut group = c.benchmark_group("search");
    for words in [&["advertising"][..], &["Revenues"], &["advertising", "marketing", "revenues"], &["zzqx"]] {
        let keywords: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        group.bench_function(words.join("+"), |b| {
            b.iter(|| {
                let hits = search(black_box(&outline), black_box(&keywords), 300).unwrap();
                render_search(&keywords, &hits, 50)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_search);
criterion_main!(benches);
