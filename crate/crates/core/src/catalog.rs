//! Named coefficient sets: the multirate coupling schemes, the base IMEX-ARK
//! pair they are built on, inner single-rate tables and the two classical
//! splittings.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tableaux::{induced_ark, ButcherTable, ImexArkPair, MriCouplingScheme, TableKind};

pub const ARK343_ETA: f64 = 0.435_866_521_508_458_999_416_019_451_193_556_842_529_3;
pub const ARK343_ALPHA: f64 = 0.552_929_148_035_939_819_361_188_729_738_592_476_494_9;

/// `(1 + η)/2`, the repeated abscissa of the third-order schemes.
const C4_3: f64 = 0.717_933_260_754_229_499_708_009_725_596_778_421_3;

pub fn ark343_a31() -> f64 {
    let e = ARK343_ETA;
    (15.0 / 4.0 - 15.0 * e + 21.0 / 4.0 * e * e) * ARK343_ALPHA - 7.0 / 2.0 + 13.0 * e - 9.0 / 2.0 * e * e
}

pub fn ark343_a32() -> f64 {
    let e = ARK343_ETA;
    (-15.0 / 4.0 + 15.0 * e - 21.0 / 4.0 * e * e) * ARK343_ALPHA + 4.0 - 25.0 / 2.0 * e + 9.0 / 2.0 * e * e
}

pub fn ark343_b2() -> f64 {
    let e = ARK343_ETA;
    -1.5 * e * e + 4.0 * e - 0.25
}

pub fn ark343_b3() -> f64 {
    let e = ARK343_ETA;
    1.5 * e * e - 5.0 * e + 1.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ImexMriGark,
    MriGark,
    ImexArk,
    Erk,
    Dirk,
    /// Lie-Trotter and Strang-Marchuk operator splittings.
    Legacy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingKind {
    LieTrotter,
    StrangMarchuk,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodData {
    Coupling(MriCouplingScheme),
    Table(ButcherTable),
    Pair(ImexArkPair),
    Splitting(SplittingKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodCatalogEntry {
    pub name: &'static str,
    pub family: Family,
    pub declared_order: usize,
    pub data: MethodData,
}

impl MethodCatalogEntry {
    pub fn scheme(&self) -> Option<&MriCouplingScheme> {
        match &self.data {
            MethodData::Coupling(s) => Some(s),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&ButcherTable> {
        match &self.data {
            MethodData::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn pair(&self) -> Option<&ImexArkPair> {
        match &self.data {
            MethodData::Pair(p) => Some(p),
            _ => None,
        }
    }
}

const NAMES: &[&str] = &[
    "imex-mri-gark3a",
    "imex-mri-gark3b",
    "imex-mri-gark4",
    "mri-gark-erk33a",
    "ark343",
    "ark343-sd",
    "rk32",
    "rk4",
    "heun",
    "euler",
    "sdirk2-trap",
    "sdirk3",
    "lie-trotter",
    "strang-marchuk",
];

/// Looks up a catalog entry by name.
pub fn get_method(name: &str) -> Result<MethodCatalogEntry> {
    use Family::*;
    let (family, order, data) = match name {
        "imex-mri-gark3a" => (ImexMriGark, 3, MethodData::Coupling(imex_mri_gark3a())),
        "imex-mri-gark3b" => (ImexMriGark, 3, MethodData::Coupling(imex_mri_gark3b())),
        "imex-mri-gark4" => (ImexMriGark, 4, MethodData::Coupling(imex_mri_gark4())),
        "mri-gark-erk33a" => (MriGark, 3, MethodData::Coupling(mri_gark_erk33a())),
        "ark343" => (ImexArk, 3, MethodData::Pair(ark343())),
        "ark343-sd" => (ImexArk, 3, MethodData::Pair(ark343_solve_decoupled(&imex_mri_gark3a()))),
        "rk32" => (Erk, 3, MethodData::Table(rk32())),
        "rk4" => (Erk, 4, MethodData::Table(rk4())),
        "heun" => (Erk, 2, MethodData::Table(heun())),
        "euler" => (Erk, 1, MethodData::Table(euler())),
        "sdirk2-trap" => (Dirk, 2, MethodData::Table(sdirk2_trap())),
        "sdirk3" => (Dirk, 3, MethodData::Table(sdirk3())),
        "lie-trotter" => (Legacy, 1, MethodData::Splitting(SplittingKind::LieTrotter)),
        "strang-marchuk" => (Legacy, 2, MethodData::Splitting(SplittingKind::StrangMarchuk)),
        _ => {
            return Err(Error::UnknownMethod {
                name: name.to_string(),
                available: NAMES.join(", "),
            })
        }
    };
    let name = NAMES.iter().find(|n| **n == name).expect("listed");
    Ok(MethodCatalogEntry {
        name,
        family,
        declared_order: order,
        data,
    })
}

/// `(name, family, declared_order)` for every catalog entry.
pub fn list_methods() -> Vec<(&'static str, Family, usize)> {
    NAMES
        .iter()
        .map(|n| {
            let e = get_method(n).expect("every listed name resolves");
            (e.name, e.family, e.declared_order)
        })
        .collect()
}

/// Builds an `s × s` matrix from 1-based `(i, j, value)` triples.
fn sparse(s: usize, entries: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(s, s);
    for &(i, j, v) in entries {
        m[(i - 1, j - 1)] = v;
    }
    m
}

const C3: [f64; 8] = [0.0, ARK343_ETA, ARK343_ETA, C4_3, C4_3, 1.0, 1.0, 1.0];

pub fn imex_mri_gark3a() -> MriCouplingScheme {
    let e = ARK343_ETA;
    let g41 = -0.410_333_696_228_852_501_459_951_372_016_107_893_7;
    let gamma = sparse(
        8,
        &[
            (2, 1, e),
            (3, 1, -e),
            (3, 3, e),
            (4, 1, g41),
            (4, 3, 0.692_400_435_474_623_001_751_941_646_416_329_472_4),
            (5, 1, -g41),
            (5, 3, -0.846_200_217_737_311_500_875_970_820_809_664_736_2),
            (5, 5, e),
            (6, 1, e),
            (6, 3, 0.926_429_909_930_239_570_044_487_409_660_101_532_8),
            (6, 5, -1.080_229_692_192_928_069_168_516_586_450_436_797),
            (7, 1, -e),
            (7, 7, e),
        ],
    );
    let w51 = 0.454_283_944_643_608_855_878_770_886_900_124_654;
    let omega = sparse(
        8,
        &[
            (2, 1, e),
            (4, 1, -0.568_871_580_123_440_092_846_503_292_531_793_202_1),
            (4, 3, 0.850_938_319_369_210_593_138_493_566_935_014_780_9),
            (5, 1, w51),
            (5, 3, -w51),
            (6, 1, -0.427_137_182_100_507_401_170_664_505_039_073_247_4),
            (6, 3, 0.156_274_773_310_338_082_101_466_049_703_702_349_6),
            (6, 5, 0.552_929_148_035_939_819_361_188_729_738_592_476_5),
            (8, 1, 0.105_858_296_071_879_638_722_377_459_477_184_953),
            (8, 3, 0.655_567_501_140_070_250_975_288_954_324_730_635),
            (8, 5, -1.197_292_318_720_408_889_113_685_864_995_472_431),
            (8, 7, e),
        ],
    );
    MriCouplingScheme::new("imex-mri-gark3a", DVector::from_row_slice(&C3), vec![gamma], Some(vec![omega]))
        .expect("catalog scheme is valid")
}

pub fn imex_mri_gark3b() -> MriCouplingScheme {
    let e = ARK343_ETA;
    let g41 = 0.041_427_375_356_441_483_715_379_923_027_827_563_9;
    let g61 = 0.112_337_314_300_604_780_263_354_341_688_960_512_3;
    let gamma = sparse(
        8,
        &[
            (2, 1, e),
            (3, 1, -e),
            (3, 3, e),
            (4, 1, g41),
            (4, 3, 0.240_639_363_889_329_016_576_610_351_375_394_014_8),
            (5, 1, -g41),
            (5, 3, -0.394_439_146_152_017_515_700_639_528_165_729_278_6),
            (5, 5, e),
            (6, 1, g61),
            (6, 3, 1.051_807_513_648_115_027_700_693_049_638_099_167),
            (6, 5, -0.882_078_088_702_949_307_672_057_116_923_838_100_9),
            (7, 1, -g61),
            (7, 3, -0.125_377_603_717_875_457_656_205_639_977_997_634_6),
            (7, 5, -0.198_151_603_489_978_761_496_459_469_526_598_695_7),
            (7, 7, e),
        ],
    );
    let w51 = 0.060_426_893_077_215_522_093_334_594_370_206_357_74;
    let omega = sparse(
        8,
        &[
            (2, 1, e),
            (4, 1, -0.175_014_528_557_046_759_061_067_000_001_874_905_9),
            (4, 3, 0.457_081_267_802_817_259_353_057_274_405_096_484_6),
            (5, 1, w51),
            (5, 3, -w51),
            (6, 1, 0.119_521_395_942_545_444_003_878_603_402_793_686_9),
            (6, 3, -1.843_725_226_689_661_917_898_533_950_296_297_65),
            (6, 5, 2.006_270_569_992_886_974_186_645_621_296_725_542),
            (7, 1, -0.546_658_578_043_052_845_174_543_108_441_866_934_3),
            (7, 3, 2.0),
            (7, 5, -1.453_341_421_956_947_154_825_456_891_558_133_066),
            (8, 1, 0.105_858_296_071_879_638_722_377_459_477_184_953),
            (8, 3, 0.655_567_501_140_070_250_975_288_954_324_730_635),
            (8, 5, -1.197_292_318_720_408_889_113_685_864_995_472_431),
            (8, 7, e),
        ],
    );
    MriCouplingScheme::new("imex-mri-gark3b", DVector::from_row_slice(&C3), vec![gamma], Some(vec![omega]))
        .expect("catalog scheme is valid")
}

pub fn imex_mri_gark4() -> MriCouplingScheme {
    let c = [0.0, 0.5, 0.5, 0.625, 0.625, 0.75, 0.75, 0.875, 0.875, 1.0, 1.0, 1.0];
    let g75 = -0.125_958_128_997_397_447_334_657_948_170_459_801;
    let g93 = -1.547_057_811_385_123_933_632_984_579_249_388_44;
    let g95 = 4.129_888_013_149_350_305_954_491_738_020_313_22;
    let g97 = -0.926_037_556_596_414_564_226_747_853_734_872_477;
    let gamma0 = sparse(
        12,
        &[
            (2, 1, 0.5),
            (3, 1, -0.25),
            (3, 3, 0.25),
            (4, 1, -3.977_281_248_108_488_183_067_033_851_462_278_89),
            (4, 3, 4.102_281_248_108_488_183_067_033_851_462_278_89),
            (5, 1, -0.069_053_887_414_016_912_327_241_470_848_093_740_6),
            (5, 3, -0.180_946_112_585_983_087_672_758_529_151_906_259),
            (5, 5, 0.25),
            (6, 1, -1.761_767_663_757_920_528_863_378_964_822_412_41),
            (6, 3, 2.694_524_698_377_298_610_155_338_150_791_461_38),
            (6, 5, -0.807_757_034_619_378_081_291_959_185_969_048_978),
            (7, 1, 0.555_872_179_155_396_948_730_508_100_958_808_496),
            (7, 3, -0.679_914_050_157_999_501_395_850_152_788_348_695),
            (7, 5, g75),
            (7, 7, 0.25),
            (8, 1, -5.840_176_028_724_955_954_446_426_657_541_065_11),
            (8, 3, 8.174_456_684_291_915_089_191_270_805_710_716_37),
            (8, 5, -g75),
            (8, 7, -2.335_238_784_564_356_582_079_502_096_340_111_06),
            (9, 1, -1.906_792_645_167_811_808_094_759_305_036_052_3),
            (9, 3, g93),
            (9, 5, g95),
            (9, 7, g97),
            (9, 9, 0.25),
            (10, 1, 3.337_028_151_688_726_054_557_652_782_529_662_52),
            (10, 3, -g93),
            (10, 5, -g95),
            (10, 7, -g97),
            (10, 9, -1.555_235_506_520_914_246_462_893_477_493_610_21),
            (11, 1, -0.821_293_629_221_007_618_720_524_112_312_446_752),
            (11, 3, 0.328_610_356_068_599_988_551_677_264_268_969_646),
            (11, 5, 0.678_001_812_102_026_694_142_641_232_421_139_516),
            (11, 7, -0.342_779_287_862_800_022_896_645_471_462_060_708),
            (11, 9, -0.092_539_251_086_819_041_077_148_912_915_601_702_5),
            (11, 11, 0.25),
        ],
    );
    let g41 = 8.704_562_496_216_976_366_134_067_702_924_557_78;
    let g101 = 2.610_471_013_041_828_492_925_786_954_987_220_43;
    let gamma1 = sparse(
        12,
        &[
            (4, 1, g41),
            (4, 3, -g41),
            (6, 1, 3.911_643_102_343_874_882_381_240_871_341_012_29),
            (6, 3, -5.027_157_171_582_631_044_965_159_243_279_110_25),
            (6, 5, 1.115_514_069_238_756_162_583_918_371_938_097_96),
            (8, 1, 10.818_607_699_139_118_011_431_837_113_164_513_2),
            (8, 3, -14.989_085_268_267_831_175_590_841_305_844_735_4),
            (8, 7, 4.170_477_569_128_713_164_159_004_192_680_222_13),
            (10, 1, -g101),
            (10, 9, g101),
        ],
    );
    let w51 = -0.404_751_031_801_105_942_697_915_907_046_990_469;
    let w75 = -0.321_273_643_827_257_315_841_450_235_893_717_036;
    let w93 = -2.430_325_019_757_162_297_132_065_927_415_566_36;
    let w95 = -1.905_479_301_151_524_635_219_201_659_483_842_13;
    let w97 = 1.231_139_266_635_724_816_012_498_195_050_284_27;
    let w119 = -0.046_269_625_543_409_520_538_574_456_457_800_851_2;
    let omega0 = sparse(
        12,
        &[
            (2, 1, 0.5),
            (4, 1, -1.917_165_343_636_628_688_781_722_160_649_469_05),
            (4, 3, 2.042_165_343_636_628_688_781_722_160_649_469_05),
            (5, 1, w51),
            (5, 3, -w51),
            (6, 1, 11.451_466_022_492_216_366_656_980_286_026_317_3),
            (6, 3, -30.210_757_475_265_042_714_406_478_155_739_506_1),
            (6, 5, 18.884_291_452_772_826_347_749_497_869_713_188_8),
            (7, 1, -0.709_033_564_760_261_450_684_711_672_946_330_144),
            (7, 3, 1.030_307_208_587_518_766_526_161_908_840_047_18),
            (7, 5, w75),
            (8, 1, -29.995_487_164_558_284_398_409_106_849_441_992_7),
            (8, 3, 37.605_982_774_991_801_805_364_896_856_243_857),
            (8, 5, -w75),
            (8, 7, -7.806_769_254_260_774_722_797_240_242_695_581_29),
            (9, 1, 3.104_665_054_272_962_116_338_769_391_849_124_22),
            (9, 3, w93),
            (9, 5, w95),
            (9, 7, w97),
            (10, 1, -2.424_429_547_752_047_869_875_875_914_355_514_01),
            (10, 3, -w93),
            (10, 5, -w95),
            (10, 7, -w97),
            (10, 9, -0.555_235_506_520_914_246_462_893_477_493_610_215),
            (11, 1, -0.010_441_350_444_797_485_902_945_189_451_653_542),
            (11, 3, 0.072_603_036_146_550_745_051_521_045_054_881_416_1),
            (11, 5, -0.128_827_595_167_726_095_223_945_409_857_642_431),
            (11, 7, 0.112_935_535_009_382_356_613_944_010_712_215_408),
            (11, 9, w119),
            (12, 1, -0.810_852_278_776_210_132_817_578_922_860_793_21),
            (12, 3, 0.256_007_319_922_049_243_500_156_219_214_088_23),
            (12, 5, 0.806_829_407_269_752_789_366_586_642_278_781_947),
            (12, 7, -0.455_714_822_872_182_379_510_589_482_174_276_116),
            (12, 9, w119),
            (12, 11, 0.25),
        ],
    );
    let w41 = 4.084_330_687_273_257_377_563_444_321_298_938_1;
    let w101 = 1.110_471_013_041_828_492_925_786_954_987_220_43;
    let omega1 = sparse(
        12,
        &[
            (4, 1, w41),
            (4, 3, -w41),
            (6, 1, -21.843_429_981_382_220_847_918_128_757_958_653_6),
            (6, 3, 59.612_012_886_927_873_543_417_124_497_385_031_2),
            (6, 5, -37.768_582_905_545_652_695_498_995_739_426_377_6),
            (8, 1, 61.659_041_458_637_091_698_187_637_044_776_645_8),
            (8, 3, -77.272_579_967_158_641_143_782_117_530_167_808_4),
            (8, 7, 15.613_538_508_521_549_445_594_480_485_391_162_6),
            (10, 1, -w101),
            (10, 9, w101),
        ],
    );
    MriCouplingScheme::new(
        "imex-mri-gark4",
        DVector::from_row_slice(&c),
        vec![gamma0, gamma1],
        Some(vec![omega0, omega1]),
    )
    .expect("catalog scheme is valid")
}

/// Explicit MRI-GARK method of order three (no separate explicit coupling).
pub fn mri_gark_erk33a() -> MriCouplingScheme {
    let gamma0 = sparse(
        4,
        &[
            (2, 1, 1.0 / 3.0),
            (3, 1, -1.0 / 3.0),
            (3, 2, 2.0 / 3.0),
            (4, 2, -2.0 / 3.0),
            (4, 3, 1.0),
        ],
    );
    let gamma1 = sparse(4, &[(4, 1, 0.5), (4, 3, -0.5)]);
    MriCouplingScheme::new(
        "mri-gark-erk33a",
        DVector::from_row_slice(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]),
        vec![gamma0, gamma1],
        None,
    )
    .expect("catalog scheme is valid")
}

/// The 4-stage IMEX-ARK(3,4,3) pair.
pub fn ark343() -> ImexArkPair {
    let e = ARK343_ETA;
    let al = ARK343_ALPHA;
    let (a31, a32, b2, b3) = (ark343_a31(), ark343_a32(), ark343_b2(), ark343_b3());
    let c = [0.0, e, (1.0 + e) / 2.0, 1.0];
    let b = [0.0, b2, b3, e];
    let explicit = ButcherTable::from_rows(&[&[], &[e], &[a31, a32], &[1.0 - 2.0 * al, al, al]], &b, &c)
        .expect("valid")
        .with_kind(TableKind::Explicit);
    let implicit = ButcherTable::from_rows(
        &[&[], &[0.0, e], &[0.0, (1.0 - e) / 2.0, e], &[0.0, b2, b3, e]],
        &b,
        &c,
    )
    .expect("valid")
    .with_kind(TableKind::DiagonallyImplicit);
    ImexArkPair::new(explicit, implicit).expect("matching stages")
}

/// Positions (1-based, explicit-then-implicit) of the free entries in the
/// 8-stage solve-decoupled ARK(3,4,3) pair.
pub const ARK343_SD_FREE_EXPLICIT: &[(usize, usize)] = &[(4, 1), (4, 3), (6, 1), (6, 3), (6, 5)];
pub const ARK343_SD_FREE_IMPLICIT: &[(usize, usize)] = &[(4, 1), (4, 3), (6, 1), (6, 3), (6, 5)];

/// The padded, solve-decoupled 8-stage form of [`ark343`]. Its free entries
/// (rows 4 and 6 of both tables) are only constrained by row sums, so they
/// are copied from the ARK pair induced by `fill`.
pub fn ark343_solve_decoupled(fill: &MriCouplingScheme) -> ImexArkPair {
    let e = ARK343_ETA;
    let al = ARK343_ALPHA;
    let (a31, a32, b2, b3) = (ark343_a31(), ark343_a32(), ark343_b2(), ark343_b3());
    let source = induced_ark(fill);
    let mut ae = sparse(
        8,
        &[
            (2, 1, e),
            (3, 1, e),
            (5, 1, a31),
            (5, 3, a32),
            (7, 1, 1.0 - 2.0 * al),
            (7, 3, al),
            (7, 5, al),
            (8, 3, b2),
            (8, 5, b3),
            (8, 7, e),
        ],
    );
    let mut ai = sparse(
        8,
        &[
            (2, 1, e),
            (3, 3, e),
            (5, 3, (1.0 - e) / 2.0),
            (5, 5, e),
            (7, 3, b2),
            (7, 5, b3),
            (7, 7, e),
            (8, 3, b2),
            (8, 5, b3),
            (8, 7, e),
        ],
    );
    if fill.stages() == 8 {
        for &(i, j) in ARK343_SD_FREE_EXPLICIT {
            ae[(i - 1, j - 1)] = source.explicit().a()[(i - 1, j - 1)];
        }
        for &(i, j) in ARK343_SD_FREE_IMPLICIT {
            ai[(i - 1, j - 1)] = source.implicit().a()[(i - 1, j - 1)];
        }
    }
    let b = ai.row(7).transpose();
    let c = DVector::from_row_slice(&C3);
    let explicit = ButcherTable::new(ae, b.clone(), c.clone()).expect("square").with_kind(TableKind::Explicit);
    let implicit = ButcherTable::new(ai, b, c).expect("square").with_kind(TableKind::DiagonallyImplicit);
    ImexArkPair::new(explicit, implicit).expect("matching stages")
}

/// Kutta's third-order explicit method.
pub fn rk32() -> ButcherTable {
    ButcherTable::from_rows(
        &[&[], &[0.5], &[-1.0, 2.0]],
        &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        &[0.0, 0.5, 1.0],
    )
    .expect("valid")
}

pub fn rk4() -> ButcherTable {
    ButcherTable::from_rows(
        &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
        &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        &[0.0, 0.5, 0.5, 1.0],
    )
    .expect("valid")
}

pub fn heun() -> ButcherTable {
    ButcherTable::from_rows(&[&[], &[1.0]], &[0.5, 0.5], &[0.0, 1.0]).expect("valid")
}

pub fn euler() -> ButcherTable {
    ButcherTable::from_rows(&[&[]], &[1.0], &[0.0]).expect("valid")
}

/// Two-stage second-order implicit table with `A = [[1, 0], [-1, 1]]`.
pub fn sdirk2_trap() -> ButcherTable {
    ButcherTable::from_rows(&[&[1.0], &[-1.0, 1.0]], &[0.5, 0.5], &[1.0, 0.0]).expect("valid")
}

/// Two-stage third-order SDIRK with diagonal `(3 + √3)/6`.
pub fn sdirk3() -> ButcherTable {
    let g = (3.0 + 3f64.sqrt()) / 6.0;
    ButcherTable::from_rows(&[&[g], &[1.0 - 2.0 * g, g]], &[0.5, 0.5], &[g, 1.0 - g]).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::validate_butcher;

    #[test]
    fn lookup_examples() {
        let s = get_method("imex-mri-gark3a").unwrap();
        let s = s.scheme().unwrap();
        assert_eq!(s.stages(), 8);
        assert_eq!(s.k_max(), 0);
        assert!((s.gamma()[0][(1, 0)] - 0.4358665215084589994).abs() < 1e-16);

        let s4 = get_method("imex-mri-gark4").unwrap();
        let s4 = s4.scheme().unwrap();
        assert_eq!(s4.stages(), 12);
        assert_eq!(s4.k_max(), 1);
        assert!((s4.gamma()[1][(3, 0)] - 8.70456249621697636).abs() < 1e-14);

        let e = get_method("mri-gark-erk33a").unwrap();
        let e = e.scheme().unwrap();
        assert!(!e.has_explicit_coupling());
        let row: Vec<f64> = (0..4).map(|j| e.gamma()[1][(3, j)]).collect();
        assert_eq!(row, vec![0.5, 0.0, -0.5, 0.0]);
    }

    #[test]
    fn unknown_method_lists_names() {
        let err = get_method("rk5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("rk5"));
        assert!(msg.contains("imex-mri-gark4"));
    }

    #[test]
    fn list_contents() {
        let all = list_methods();
        assert!(all.len() >= 10);
        let has = |n: &str| all.iter().any(|(m, _, _)| *m == n);
        for n in ["lie-trotter", "strang-marchuk", "rk32", "rk4", "heun", "euler", "sdirk2-trap"] {
            assert!(has(n), "{n}");
        }
        let lt = all.iter().find(|e| e.0 == "lie-trotter").unwrap();
        assert_eq!(lt.1, Family::Legacy);
    }

    #[test]
    fn every_table_validates() {
        for (name, _, _) in list_methods() {
            let entry = get_method(name).unwrap();
            match &entry.data {
                MethodData::Table(t) => assert!(validate_butcher(t).is_empty(), "{name}"),
                MethodData::Pair(p) => {
                    assert!(validate_butcher(p.explicit()).is_empty(), "{name}");
                    assert!(validate_butcher(p.implicit()).is_empty(), "{name}");
                }
                _ => {}
            }
        }
    }

    #[test]
    fn ark343_formulas() {
        let e = ARK343_ETA;
        let a32 = ark343_a32();
        let direct = (-15.0 / 4.0 + 15.0 * e - 21.0 / 4.0 * e * e) * ARK343_ALPHA + 4.0 - 12.5 * e + 4.5 * e * e;
        assert!((a32 - direct).abs() <= 1e-15);
        // η is the root of x^3 - 3x^2 + 3x/2 - 1/6 in (0,1) that makes the implicit part L-stable
        let p = e * e * e - 3.0 * e * e + 1.5 * e - 1.0 / 6.0;
        assert!(p.abs() < 1e-15);
        let pair = ark343();
        assert!((pair.explicit().a()[(2, 0)] - ark343_a31()).abs() < 1e-16);
    }

    #[test]
    fn catalog_abscissa_for_third_order() {
        assert!((C4_3 - (1.0 + ARK343_ETA) / 2.0).abs() < 1e-16);
    }

    #[test]
    fn sdirk3_diagonal() {
        let t = sdirk3();
        assert!((t.a()[(0, 0)] - 0.7886751345948129).abs() < 1e-15);
        assert_eq!(t.kind(), TableKind::DiagonallyImplicit);
    }
}
