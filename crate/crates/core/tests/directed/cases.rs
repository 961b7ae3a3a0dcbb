//! Directed cases for the single-cycle core: one or more per instruction
//! kind plus edge cases. Expected values are worked out by hand. Every
//! program is also run in lockstep against the pipeline. Each case panics
//! on failure; `golden_directed` wraps them as tests and the acceptance
//! harness runs them as one criterion.

use crate::common::asm::*;
use crate::common::*;
use rvpipe::csr::addr;
use rvpipe::event::{Core, CoreKind};
use rvpipe::isa::{DecodeOptions, Op};
use rvpipe::lockstep::LockstepConfig;
use rvpipe::pipeline::PipelineConfig;
use rvpipe::runner::{HaltReason, Machine};

const HANDLER: u32 = 0x100;
const DATA: u32 = 0x8000;

/// Append an exit, install a handler that exits with 0xEE, run the golden
/// core to completion and check it against the pipeline.
fn run(prog: &[u32]) -> Machine {
    let mut code = vec![u(Op::Lui, 31, HANDLER >> 12)];
    code.push(addi(31, 31, HANDLER as i32));
    code.push(csr(Op::Csrrw, 0, addr::MTVEC, 31));
    code.push(u(Op::Lui, 28, DATA >> 12));
    code.extend_from_slice(prog);
    code.extend(exit_with(0, 31));
    assert!(code.len() * 4 <= HANDLER as usize);
    let mut handler = vec![addi(30, 0, 0xEE)];
    handler.extend(exit_with(30, 31));
    let blocks = [(0, &code[..]), (HANDLER, &handler[..])];

    let outcome = lockstep_blocks(&blocks, LockstepConfig::default());
    assert!(outcome.is_match(), "{outcome:?}");

    let mut m = machine(CoreKind::Golden, bus_with_blocks(&blocks));
    let halt = m.run(10_000).expect("no fault");
    assert!(matches!(halt, HaltReason::Exit(_)), "{halt:?}");
    m
}

fn check(prog: &[u32], expect: &[(usize, u32)]) -> Machine {
    let m = run(prog);
    for &(r, v) in expect {
        assert_eq!(m.core.regs()[r], v, "x{r}: got {:#010x}, want {v:#010x}", m.core.regs()[r]);
    }
    m
}

fn trapped(m: &Machine) -> bool {
    m.bus.exit_code() == Some(0xEE)
}

/// `li` expanded into a flat list.
fn li_v(rd: u8, v: u32) -> Vec<u32> {
    li(rd, v).to_vec()
}

fn cat(parts: &[&[u32]]) -> Vec<u32> {
    parts.concat()
}

// upper immediates and jumps

pub fn lui_places_upper_bits() {
    check(&[u(Op::Lui, 1, 0x12345)], &[(1, 0x1234_5000)]);
}

pub fn auipc_adds_pc() {
    // four prologue words: the auipc sits at 0x10
    check(&[u(Op::Auipc, 1, 0x1)], &[(1, 0x1010)]);
    check(&[u(Op::Auipc, 1, 0xFFFFF)], &[(1, 0xFFFF_F010)]);
}

pub fn jal_links_and_skips() {
    check(&[jal(1, 8), addi(2, 0, 1), addi(3, 0, 1)], &[(1, 0x14), (2, 0), (3, 1)]);
}

pub fn jal_backward() {
    // 0x10: j +12 -> 0x1c ; 0x14: addi x2 ; 0x18: j +8 -> 0x20 ; 0x1c: j -8 -> 0x14
    check(&[jal(0, 12), addi(2, 0, 7), jal(0, 8), jal(0, -8), addi(3, 0, 1)], &[(2, 7), (3, 1)]);
}

pub fn jalr_clears_bit_zero() {
    // x5 = 0x1c; jalr to 0x1d & !1 = 0x1c, skipping the addi at 0x18
    check(&[addi(5, 0, 0x1c), i(Op::Jalr, 1, 5, 1), addi(2, 0, 1), addi(3, 0, 1)], &[(1, 0x18), (2, 0), (3, 1)]);
}

pub fn jalr_rd_equals_rs1() {
    check(&[addi(5, 0, 0x1c), i(Op::Jalr, 5, 5, 0), addi(2, 0, 1), addi(3, 0, 1)], &[(5, 0x18), (2, 0), (3, 1)]);
}

// branches: x3 ends 0 when taken, 1 when not

fn branch_case(op: Op, a: u32, b_: u32) -> u32 {
    let prog = cat(&[&li_v(1, a), &li_v(2, b_), &[b(op, 1, 2, 8), addi(3, 0, 1)]]);
    let m = run(&prog);
    m.core.regs()[3]
}

pub fn beq_bne() {
    assert_eq!(branch_case(Op::Beq, 5, 5), 0);
    assert_eq!(branch_case(Op::Beq, 5, 6), 1);
    assert_eq!(branch_case(Op::Bne, 5, 6), 0);
    assert_eq!(branch_case(Op::Bne, 5, 5), 1);
}

pub fn blt_bge_are_signed() {
    assert_eq!(branch_case(Op::Blt, 0xFFFF_FFFF, 1), 0);
    assert_eq!(branch_case(Op::Blt, 1, 0xFFFF_FFFF), 1);
    assert_eq!(branch_case(Op::Bge, 1, 0xFFFF_FFFF), 0);
    assert_eq!(branch_case(Op::Bge, 7, 7), 0);
    assert_eq!(branch_case(Op::Bge, 0x8000_0000, 0), 1);
}

pub fn bltu_bgeu_are_unsigned() {
    assert_eq!(branch_case(Op::Bltu, 1, 0xFFFF_FFFF), 0);
    assert_eq!(branch_case(Op::Bltu, 0xFFFF_FFFF, 1), 1);
    assert_eq!(branch_case(Op::Bgeu, 0xFFFF_FFFF, 1), 0);
    assert_eq!(branch_case(Op::Bgeu, 0, 0), 0);
    assert_eq!(branch_case(Op::Bgeu, 0, 1), 1);
}

pub fn untaken_branch_to_misaligned_target_does_not_trap() {
    let m = run(&[addi(1, 0, 1), b(Op::Beq, 1, 0, 6), addi(3, 0, 9)]);
    assert!(!trapped(&m));
    assert_eq!(m.core.regs()[3], 9);
}

pub fn taken_branch_to_misaligned_target_traps() {
    let m = run(&[b(Op::Beq, 0, 0, 6)]);
    assert!(trapped(&m));
    assert_eq!(m.core.csrs().mcause, 0);
    assert_eq!(m.core.csrs().mtval, 0x16);
    assert_eq!(m.core.csrs().mepc(), 0x10);
}

// loads: memory word 0x80817ff0 = bytes f0 7f 81 80

fn with_data(rest: &[u32]) -> Vec<u32> {
    cat(&[&li_v(1, 0x8081_7FF0), &[s(Op::Sw, 1, 28, 0)], rest])
}

pub fn lb_sign_extends() {
    check(&with_data(&[i(Op::Lb, 2, 28, 0), i(Op::Lb, 3, 28, 1), i(Op::Lb, 4, 28, 3)]), &[
        (2, 0xFFFF_FFF0),
        (3, 0x7F),
        (4, 0xFFFF_FF80),
    ]);
}

pub fn lbu_zero_extends() {
    check(&with_data(&[i(Op::Lbu, 2, 28, 0), i(Op::Lbu, 3, 28, 3)]), &[(2, 0xF0), (3, 0x80)]);
}

pub fn lh_sign_extends() {
    check(&with_data(&[i(Op::Lh, 2, 28, 0), i(Op::Lh, 3, 28, 2)]), &[(2, 0x7FF0), (3, 0xFFFF_8081)]);
}

pub fn lhu_zero_extends() {
    check(&with_data(&[i(Op::Lhu, 2, 28, 2)]), &[(2, 0x8081)]);
}

pub fn lw_whole_word() {
    check(&with_data(&[i(Op::Lw, 2, 28, 0)]), &[(2, 0x8081_7FF0)]);
}

pub fn load_negative_offset() {
    check(
        &cat(&[&li_v(1, 0xCAFE_F00D), &[s(Op::Sw, 1, 28, 0), addi(5, 28, 8), i(Op::Lw, 2, 5, -8)]]),
        &[(2, 0xCAFE_F00D)],
    );
}

pub fn load_into_x0_is_discarded() {
    check(&with_data(&[i(Op::Lw, 0, 28, 0)]), &[(0, 0)]);
}

// stores

pub fn sb_merges_one_byte() {
    check(&with_data(&[addi(2, 0, 0x1AB), s(Op::Sb, 2, 28, 3), i(Op::Lw, 3, 28, 0)]), &[(3, 0xAB81_7FF0)]);
}

pub fn sh_merges_halfword() {
    check(&with_data(&[addi(2, 0, -2), s(Op::Sh, 2, 28, 0), i(Op::Lw, 3, 28, 0)]), &[(3, 0x8081_FFFE)]);
}

pub fn sw_then_bytes_little_endian() {
    check(
        &cat(&[&li_v(1, 0x1122_3344), &[s(Op::Sw, 1, 28, 4), i(Op::Lbu, 2, 28, 4), i(Op::Lbu, 3, 28, 7)]]),
        &[(2, 0x44), (3, 0x11)],
    );
}

pub fn store_then_load_same_address_back_to_back() {
    check(&[addi(1, 0, 77), s(Op::Sw, 1, 28, 0), i(Op::Lw, 2, 28, 0), addi(3, 2, 1)], &[(2, 77), (3, 78)]);
}

// ALU immediate forms

pub fn addi_wraps() {
    check(&cat(&[&li_v(1, 0x7FFF_FFFF), &[addi(2, 1, 1)]]), &[(2, 0x8000_0000)]);
    check(&[addi(1, 0, -2048)], &[(1, 0xFFFF_F800)]);
}

pub fn slti_signed() {
    check(&[addi(1, 0, -1), i(Op::Slti, 2, 1, 0), i(Op::Slti, 3, 1, -2)], &[(2, 1), (3, 0)]);
}

pub fn sltiu_sign_extends_then_compares_unsigned() {
    // imm -1 becomes 0xffffffff, so anything but that is below it
    check(&[addi(1, 0, 1), i(Op::Sltiu, 2, 1, -1), i(Op::Sltiu, 3, 0, 1), i(Op::Sltiu, 4, 1, 1)], &[
        (2, 1),
        (3, 1),
        (4, 0),
    ]);
}

pub fn xori_minus_one_is_not() {
    check(&[addi(1, 0, 0x0F0), i(Op::Xori, 2, 1, -1)], &[(2, 0xFFFF_FF0F)]);
}

pub fn ori_andi() {
    check(&[addi(1, 0, 0x0F0), i(Op::Ori, 2, 1, 0x00F), i(Op::Andi, 3, 1, 0x030), i(Op::Andi, 4, 1, -16)], &[
        (2, 0xFF),
        (3, 0x30),
        (4, 0xF0),
    ]);
}

pub fn immediate_shifts() {
    check(
        &[addi(1, 0, 1), i(Op::Slli, 2, 1, 31), i(Op::Srli, 3, 2, 31), i(Op::Srai, 4, 2, 31), i(Op::Srai, 5, 2, 0)],
        &[(2, 0x8000_0000), (3, 1), (4, 0xFFFF_FFFF), (5, 0x8000_0000)],
    );
}

// register-register forms

pub fn add_sub_wrap() {
    check(&cat(&[&li_v(1, 0xFFFF_FFFF), &[addi(2, 0, 1), r(Op::Add, 3, 1, 2), r(Op::Sub, 4, 0, 2)]]), &[
        (3, 0),
        (4, 0xFFFF_FFFF),
    ]);
}

pub fn sll_masks_shift_amount() {
    check(&[addi(1, 0, 3), addi(2, 0, 33), r(Op::Sll, 3, 1, 2)], &[(3, 6)]);
}

pub fn srl_masks_shift_amount() {
    // shamt = 0xffffffe1 & 31 = 1
    check(&cat(&[&li_v(1, 0x8000_0000), &li_v(2, 0xFFFF_FFE1), &[r(Op::Srl, 3, 1, 2)]]), &[(3, 0x4000_0000)]);
}

pub fn sra_keeps_sign() {
    check(&cat(&[&li_v(1, 0x8000_0000), &[addi(2, 0, 4), r(Op::Sra, 3, 1, 2), r(Op::Srl, 4, 1, 2)]]), &[
        (3, 0xF800_0000),
        (4, 0x0800_0000),
    ]);
}

pub fn slt_sltu_differ_on_sign() {
    check(&[addi(1, 0, -1), addi(2, 0, 1), r(Op::Slt, 3, 1, 2), r(Op::Sltu, 4, 1, 2), r(Op::Sltu, 5, 0, 2)], &[
        (3, 1),
        (4, 0),
        (5, 1),
    ]);
}

pub fn xor_or_and() {
    check(
        &[addi(1, 0, 0x5A), addi(2, 0, 0x0F), r(Op::Xor, 3, 1, 2), r(Op::Or, 4, 1, 2), r(Op::And, 5, 1, 2)],
        &[(3, 0x55), (4, 0x5F), (5, 0x0A)],
    );
}

pub fn writes_to_x0_are_dropped() {
    check(&[addi(0, 0, 5), r(Op::Add, 1, 0, 0), u(Op::Lui, 0, 1)], &[(0, 0), (1, 0)]);
}

pub fn dependent_chain() {
    check(&[addi(1, 0, 1), r(Op::Add, 1, 1, 1), r(Op::Add, 1, 1, 1), r(Op::Add, 1, 1, 1)], &[(1, 8)]);
}

// CSRs

pub fn csrrw_swaps() {
    let m = check(
        &[addi(1, 0, 0x55), csr(Op::Csrrw, 0, addr::MSCRATCH, 1), addi(2, 0, 0x66), csr(Op::Csrrw, 3, addr::MSCRATCH, 2)],
        &[(3, 0x55)],
    );
    assert_eq!(m.core.csrs().mscratch, 0x66);
}

pub fn csrrs_sets_bits() {
    let m = check(
        &[addi(1, 0, 0x0F), csr(Op::Csrrw, 0, addr::MSCRATCH, 1), addi(2, 0, 0x30), csr(Op::Csrrs, 3, addr::MSCRATCH, 2)],
        &[(3, 0x0F)],
    );
    assert_eq!(m.core.csrs().mscratch, 0x3F);
}

pub fn csrrc_clears_bits() {
    let m = check(
        &[addi(1, 0, 0xFF), csr(Op::Csrrw, 0, addr::MSCRATCH, 1), addi(2, 0, 0x0F), csr(Op::Csrrc, 3, addr::MSCRATCH, 2)],
        &[(3, 0xFF)],
    );
    assert_eq!(m.core.csrs().mscratch, 0xF0);
}

pub fn csr_immediate_forms() {
    let m = check(
        &[
            csr(Op::Csrrwi, 0, addr::MSCRATCH, 31),
            csr(Op::Csrrsi, 1, addr::MSCRATCH, 0),
            csr(Op::Csrrci, 2, addr::MSCRATCH, 3),
            csr(Op::Csrrsi, 3, addr::MSCRATCH, 0),
        ],
        &[(1, 31), (2, 31), (3, 28)],
    );
    assert_eq!(m.core.csrs().mscratch, 28);
}

pub fn misa_reads_rv32i_and_ignores_writes() {
    let m = check(&[addi(1, 0, -1), csr(Op::Csrrw, 0, addr::MISA, 1), csr(Op::Csrrs, 2, addr::MISA, 0)], &[(2, 0x4000_0100)]);
    assert!(!trapped(&m));
}

pub fn mstatus_keeps_only_implemented_fields() {
    // MIE | MPIE written; MPP always reads 11
    check(&[addi(1, 0, -1), csr(Op::Csrrw, 0, addr::MSTATUS, 1), csr(Op::Csrrs, 2, addr::MSTATUS, 0)], &[(2, 0x1888)]);
}

pub fn mtvec_mode_bits_forced_to_direct() {
    check(&[addi(1, 0, 0x203), csr(Op::Csrrw, 2, addr::MTVEC, 1), csr(Op::Csrrs, 3, addr::MTVEC, 0)], &[
        (2, HANDLER),
        (3, 0x200),
    ]);
}

pub fn read_only_csr_read_is_legal() {
    let m = check(&[csr(Op::Csrrs, 1, addr::MVENDORID, 0), csr(Op::Csrrsi, 2, addr::MHARTID, 0)], &[(1, 0), (2, 0)]);
    assert!(!trapped(&m));
}

pub fn write_to_read_only_csr_is_illegal() {
    let word = csr(Op::Csrrw, 0, addr::CYCLE, 1);
    let m = run(&[addi(1, 0, 1), word]);
    assert!(trapped(&m));
    assert_eq!(m.core.csrs().mcause, 2);
    assert_eq!(m.core.csrs().mtval, word);
}

pub fn unimplemented_csr_is_illegal() {
    let m = run(&[csr(Op::Csrrs, 1, 0x7C0, 0)]);
    assert!(trapped(&m));
    assert_eq!(m.core.csrs().mcause, 2);
}

pub fn counters_count_cycles_and_retirements() {
    // prologue is 4 instructions; the csrr at index 4 runs in cycle 5 and
    // sees the 4 cycles and 4 retirements before it
    check(
        &[csr(Op::Csrrs, 1, addr::MCYCLE, 0), csr(Op::Csrrs, 2, addr::MINSTRET, 0), csr(Op::Csrrs, 3, addr::INSTRET, 0)],
        &[(1, 4), (2, 5), (3, 6)],
    );
}

pub fn minstret_write_replaces_increment() {
    check(&[addi(1, 0, 100), csr(Op::Csrrw, 0, addr::MINSTRET, 1), csr(Op::Csrrs, 2, addr::MINSTRET, 0)], &[(2, 100)]);
}

pub fn counter_high_halves() {
    check(&[addi(1, 0, 3), csr(Op::Csrrw, 0, addr::MCYCLEH, 1), csr(Op::Csrrs, 2, addr::CYCLEH, 0)], &[(2, 3)]);
}

// traps

pub fn ecall_records_cause_and_epc() {
    let m = run(&[addi(1, 0, 1), ECALL]);
    assert!(trapped(&m));
    let c = m.core.csrs();
    assert_eq!((c.mcause, c.mepc(), c.mtval), (11, 0x14, 0));
}

pub fn ebreak_records_cause() {
    let m = run(&[EBREAK]);
    let c = m.core.csrs();
    assert_eq!((c.mcause, c.mepc(), c.mtval), (3, 0x10, 0));
}

pub fn illegal_word_records_raw_in_mtval() {
    let m = run(&[0xFFFF_FFFF]);
    let c = m.core.csrs();
    assert_eq!((c.mcause, c.mtval), (2, 0xFFFF_FFFF));
}

pub fn all_zero_word_is_illegal() {
    let m = run(&[0]);
    assert_eq!(m.core.csrs().mcause, 2);
}

pub fn misaligned_load_traps_with_address() {
    let m = run(&[i(Op::Lw, 1, 28, 2)]);
    let c = m.core.csrs();
    assert_eq!((c.mcause, c.mtval), (4, DATA + 2));
}

pub fn misaligned_halfword_store_traps() {
    let m = run(&[s(Op::Sh, 1, 28, 1)]);
    let c = m.core.csrs();
    assert_eq!((c.mcause, c.mtval), (6, DATA + 1));
}

pub fn byte_access_is_never_misaligned() {
    let m = run(&[s(Op::Sb, 0, 28, 3), i(Op::Lb, 1, 28, 1)]);
    assert!(!trapped(&m));
}

pub fn misaligned_jal_target_traps_without_link() {
    let m = run(&[addi(1, 0, 5), jal(1, 6)]);
    let c = m.core.csrs();
    assert_eq!((c.mcause, c.mtval, c.mepc()), (0, 0x1a, 0x14));
    assert_eq!(m.core.regs()[1], 5);
}

pub fn trap_saves_and_clears_mie() {
    let m = run(&[csr(Op::Csrrsi, 0, addr::MSTATUS, 8), ECALL]);
    let st = m.core.csrs().mstatus();
    assert_eq!(st & 0x88, 0x80, "MIE cleared, MPIE set");
}

pub fn mret_returns_to_mepc_and_restores_mie() {
    // mstatus.MPIE=1, MIE=0, mepc -> skip the first addi after mret
    let m = check(
        &[
            addi(1, 0, 0x80),
            csr(Op::Csrrw, 0, addr::MSTATUS, 1),
            addi(2, 0, 0x28),
            csr(Op::Csrrw, 0, addr::MEPC, 2),
            MRET,
            addi(3, 0, 1),
            addi(4, 0, 1),
        ],
        &[(3, 0), (4, 1)],
    );
    assert_eq!(m.core.csrs().mstatus() & 0x88, 0x88);
}

pub fn mepc_low_bits_read_as_zero() {
    check(&[addi(1, 0, 0x103), csr(Op::Csrrw, 0, addr::MEPC, 1), csr(Op::Csrrs, 2, addr::MEPC, 0)], &[(2, 0x100)]);
}

pub fn fence_is_illegal_by_default_and_nop_on_request() {
    let fence = 0x0ff0_000f;
    let m = run(&[fence]);
    assert_eq!(m.core.csrs().mcause, 2);

    let mut code = vec![fence, addi(1, 0, 3)];
    code.extend(exit_with(0, 31));
    let cfg = PipelineConfig {
        decode: DecodeOptions { fence_nop: true },
        ..Default::default()
    };
    let mut m = Machine::new(CoreKind::Golden, bus_with(&code, 0), 0, cfg);
    m.run(100).unwrap();
    assert_eq!(m.core.regs()[1], 3);
    assert_eq!(m.core.csrs().mcause, 0);
}

pub fn golden_cpi_is_exactly_one() {
    let m = run(&[addi(1, 0, 1), EBREAK, i(Op::Lw, 2, 28, 0), addi(3, 2, 1)]);
    assert_eq!(m.core.cycles(), m.core.instructions() + 1, "one cycle per retirement plus one trap step");
    let m = run(&[addi(1, 0, 1), i(Op::Lw, 2, 28, 0), addi(3, 2, 1)]);
    assert_eq!(m.core.cycles(), m.core.instructions());
    assert_eq!(m.stats(None).cpi(), Some(1.0));
}

/// Invoke `$m!` with the name of every case.
macro_rules! for_each_case {
    ($m:ident) => {
        $m!(
            lui_places_upper_bits,
            auipc_adds_pc,
            jal_links_and_skips,
            jal_backward,
            jalr_clears_bit_zero,
            jalr_rd_equals_rs1,
            beq_bne,
            blt_bge_are_signed,
            bltu_bgeu_are_unsigned,
            untaken_branch_to_misaligned_target_does_not_trap,
            taken_branch_to_misaligned_target_traps,
            lb_sign_extends,
            lbu_zero_extends,
            lh_sign_extends,
            lhu_zero_extends,
            lw_whole_word,
            load_negative_offset,
            load_into_x0_is_discarded,
            sb_merges_one_byte,
            sh_merges_halfword,
            sw_then_bytes_little_endian,
            store_then_load_same_address_back_to_back,
            addi_wraps,
            slti_signed,
            sltiu_sign_extends_then_compares_unsigned,
            xori_minus_one_is_not,
            ori_andi,
            immediate_shifts,
            add_sub_wrap,
            sll_masks_shift_amount,
            srl_masks_shift_amount,
            sra_keeps_sign,
            slt_sltu_differ_on_sign,
            xor_or_and,
            writes_to_x0_are_dropped,
            dependent_chain,
            csrrw_swaps,
            csrrs_sets_bits,
            csrrc_clears_bits,
            csr_immediate_forms,
            misa_reads_rv32i_and_ignores_writes,
            mstatus_keeps_only_implemented_fields,
            mtvec_mode_bits_forced_to_direct,
            read_only_csr_read_is_legal,
            write_to_read_only_csr_is_illegal,
            unimplemented_csr_is_illegal,
            counters_count_cycles_and_retirements,
            minstret_write_replaces_increment,
            counter_high_halves,
            ecall_records_cause_and_epc,
            ebreak_records_cause,
            illegal_word_records_raw_in_mtval,
            all_zero_word_is_illegal,
            misaligned_load_traps_with_address,
            misaligned_halfword_store_traps,
            byte_access_is_never_misaligned,
            misaligned_jal_target_traps_without_link,
            trap_saves_and_clears_mie,
            mret_returns_to_mepc_and_restores_mie,
            mepc_low_bits_read_as_zero,
            fence_is_illegal_by_default_and_nop_on_request,
            golden_cpi_is_exactly_one
        );
    };
}
#[allow(unused_imports)]
pub(crate) use for_each_case;

macro_rules! table {
    ($($name:ident),* $(,)?) => {
        pub const ALL: &[(&str, fn())] = &[$((stringify!($name), $name as fn())),*];
    };
}
for_each_case!(table);

