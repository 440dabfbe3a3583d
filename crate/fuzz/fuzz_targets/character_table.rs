#![no_main]

use libfuzzer_sys::fuzz_target;
use parsikern::io::parse_character_table;

fuzz_target!(|data: &[u8]| {
    let Some((&t, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let declared = (t != 0).then_some(usize::from(t % 8));
    if let Ok(table) = parse_character_table(text, declared) {
        if let Some(t) = declared {
            assert!(table.alphabet().len() <= t);
        }
        let _ = table.to_character();
    }
});
