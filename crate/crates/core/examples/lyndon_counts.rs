use indefinite::lyndon::{lyndon_words, witt_count};

fn main() {
    for n in [2u64, 4] {
        let row: Vec<String> = (2..=10).map(|k| witt_count(n, k).to_string()).collect();
        println!("S_{n}(k), k = 2..10: {}", row.join(" "));
    }
    let words: Vec<String> = lyndon_words(2, 5)
        .iter()
        .map(|w| w.symbols.iter().map(|s| s.to_string()).collect())
        .collect();
    println!("binary Lyndon words of length 5: {}", words.join(" "));
    println!("S_2(60) = {}", witt_count(2, 60));
}
