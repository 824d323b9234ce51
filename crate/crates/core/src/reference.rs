//! Published reference rows used by the verification harness.
//!
//! Coefficients are written in the display format of `WittClassQ`, so rows with
//! `<2>` entries compare as strings.

/// beta-rows of V_d for the plane, d = 1..8.
pub const P2_BETA: &[(i64, &[i64])] = &[
    (1, &[1]),
    (2, &[1]),
    (3, &[0, 1]),
    (4, &[0, 8, 2, 1]),
    (5, &[64, 0, 46, 16, 12, 4, 1]),
    (6, &[1024, 256, 1088, 848, 728, 480, 288, 132, 46]),
    (7, &[-14336, 13056, 4096, 16978, 16512, 18088, 16240, 13491, 9832, 6238, 3336]),
    (
        8,
        &[
            -280576, 390144, 356352, 913408, 1300160, 1719968, 2029008, 2213368, 2217016, 2037884, 1704276,
            1285806,
        ],
    ),
];

/// lambda-rows of V_d for the plane.
pub const P2_LAMBDA: &[(i64, &[&str])] = &[
    (1, &["1"]),
    (2, &["1"]),
    (3, &["0", "1"]),
    (4, &["-13", "13", "-1", "1"]),
    (5, &["589", "<2> - 110", "109", "<2> - 14", "13", "<2> - 2", "1"]),
    (6, &["196500", "-96160", "49110", "-21068", "9186", "-3176", "1066", "-236", "46"]),
    (
        7,
        &[
            "116803576", "-63115170", "32807172", "-16003434", "7374736", "-3105703", "1196494", "-398753", "113384",
            "-23786", "3336",
        ],
    ),
    (
        8,
        &[
            "-409568889748",
            "209980086324",
            "-102839510628",
            "47794430388",
            "-20878902720",
            "8478699840",
            "-3148076928",
            "1046510240",
            "-300864590",
            "71144126",
            "-12439590",
            "1285806",
        ],
    ),
];

/// chi-rows of V_d for the plane (exact rows only).
pub const P2_CHI: &[(i64, &[i64])] = &[
    (4, &[-2, 2, -1, 1]),
    (5, &[-118, -18, 18, 1, -1, -1, 1]),
    (6, &[-4474, -9460, 6644, 828, -2680, 836, 284, -236, 46]),
    (7, &[-4519048, 6205190, -448528, -2536404, 1184776, 350017, -437346, 76967, 46664, -23786, 3336]),
];

/// Multireal values Wel(4; s) for s = 0..5.
pub const P2_D4_WEL: &[i64] = &[240, 144, 80, 40, 16, 0];

/// Rows of the d = 4 multireal triangle, top row first.
pub const P2_D4_TRIANGLE: &[&[i64]] =
    &[&[0, 16, 40, 80, 144, 240], &[8, 12, 20, 32, 48], &[2, 4, 6, 8], &[1, 1, 1], &[0, 0], &[0]];

/// beta-rows of the two-point blow-up invariants of bidegree (a, b), first block index only.
pub const P1P1_BETA: &[((i64, i64), &[i64])] = &[
    ((3, 4), &[224, 92, 78, 40, 20, 6, 1]),
    ((3, 5), &[991, 448, 408, 248, 158, 80, 32, 8]),
    ((4, 5), &[13056, 7552, 8128, 7248, 6376, 4864, 3328, 1920, 912]),
];

/// lambda-rows for bidegree (a, b); the (4, 5) constant term is recomputed from its beta row.
pub const P1P1_LAMBDA: &[((i64, i64), &[&str])] = &[
    ((3, 4), &["<2> + 639", "<2> - 1", "<2> + 95", "<2> - 1", "<2> + 11", "<2> - 1", "1"]),
    ((3, 5), &["-2595", "3432", "-1076", "792", "-234", "120", "-24", "8"]),
    ((4, 5), &["4394560", "-2232960", "1113240", "-494672", "208472", "-74240", "23632", "-5376", "912"]),
];

/// chi-rows for bidegree (a, b).
pub const P1P1_CHI: &[((i64, i64), &[i64])] = &[
    ((2, 4), &[14, 2, -1, 1]),
    ((3, 4), &[42, 0, 18, 0, -1, 0, 1]),
    ((3, 5), &[-105, 512, -86, -168, 126, 0, -24, 8]),
    ((4, 5), &[-77528, -264496, 163008, 36272, -69240, 17152, 8128, -5376, 912]),
];

/// lambda-rows for bidegree (a, 2), a = 1..7.
pub const P1P1_A2_LAMBDA: &[(i64, &[&str])] = &[
    (1, &["1"]),
    (2, &["1", "1"]),
    (3, &["<2> + 11", "<2> - 1", "1"]),
    (4, &["3", "13", "-1", "1"]),
    (5, &["123", "-12", "<2> + 14", "<2> - 3", "1"]),
    (6, &["-99", "153", "-30", "18", "-3", "1"]),
    (7, &["1336", "-304", "<2> + 204", "<2> - 53", "<2> + 21", "<2> - 5", "1"]),
];

/// Symmetric bidegree (a, a) with a conjugate pair of blown-up points: beta coefficients
/// by (i, k) where k indexes the pair block.
pub const P1P1_SYM_BETA: &[(i64, &[((usize, usize), i64)])] = &[
    (1, &[((0, 0), 1)]),
    (2, &[((1, 0), 1), ((0, 1), 1)]),
    (3, &[((0, 0), 16), ((2, 0), 8), ((3, 0), 2), ((4, 0), 1), ((0, 1), 15), ((1, 1), 8), ((2, 1), 2), ((3, 1), 1)]),
];

/// chi-rows of blow-ups at single points: blocks d_1..d_r of size one each, with floor class.
pub const BLOWUP_CHI: &[(&[i64], [i64; 4], &[i64])] = &[
    (&[3, 1], [3, 1, 0, 0], &[1, 1]),
    (&[4, 2], [4, 2, 0, 0], &[3, 0, 1]),
    (&[4, 1, 1], [4, 1, 1, 0], &[3, 3, 1, 1]),
    (&[4, 2, 2], [4, 2, 2, 0], &[1, 1]),
    (&[4, 1, 1, 2], [4, 2, 1, 1], &[6, 2, 1]),
];
