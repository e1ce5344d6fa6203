#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(image) = wrfcm::io::decode_image(data) {
        assert_eq!(image.len() * image.channels(), image.data().len());
        assert!(image.data().iter().all(|v| (0.0..=255.0).contains(v)));
        // whatever decodes must survive a PNG round trip unchanged
        let png = wrfcm::io::encode_png(&image).unwrap();
        assert_eq!(wrfcm::io::decode_image(&png).unwrap(), image);
    }
});
