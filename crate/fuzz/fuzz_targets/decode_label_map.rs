#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (u8, &[u8])| {
    let (c, bytes) = input;
    let c = usize::from(c % 12) + 1;
    if let Ok(map) = wrfcm::io::decode_label_map(bytes, c) {
        assert!(map.labels().iter().all(|&l| l < c));
        let png = wrfcm::io::encode_png(&wrfcm::io::label_map_to_image(&map, c).unwrap()).unwrap();
        assert_eq!(wrfcm::io::decode_label_map(&png, c).unwrap(), map);
    }
});
