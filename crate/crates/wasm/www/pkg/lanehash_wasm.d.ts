/* tslint:disable */
/* eslint-disable */

/**
 * Flips one random bit of a random leaf `trials` times and histograms how
 * many of the 256 digest bits change.
 */
export function avalanche(seed: bigint, trials: number): string;

/**
 * Hashes UTF-8 text (7 bytes per element) and reports the digest together
 * with the digest of the same text with bit `flip_bit` of its packed
 * elements inverted.
 */
export function hash_text(text: string, flip_bit: number): string;

/**
 * Abstract instruction counts of a Merkle build at each lane width.
 */
export function op_counts(log2_leaves: number): string;

/**
 * Scenario table and power chain for the what-if explorer.
 */
export function whatif_table(baseline: number, m: number, r256: number, r512: number, d: number, mu: number, s: number, gamma: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly avalanche: (a: bigint, b: number) => [number, number];
    readonly hash_text: (a: number, b: number, c: number) => [number, number];
    readonly op_counts: (a: number) => [number, number];
    readonly whatif_table: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
