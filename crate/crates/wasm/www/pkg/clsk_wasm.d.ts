/* tslint:disable */
/* eslint-disable */

/**
 * Time-averaged synchronization errors of one symbol's configuration over a
 * coupling-strength grid: the largest intra-cluster and the smallest
 * inter-cluster error per point (null where the run diverged).
 */
export function epsilon_scan(example: number, symbol: number, eps_min: number, eps_max: number, points: number, seed: number): string;

/**
 * Largest transverse Lyapunov exponent on an evenly spaced `eta` grid.
 * `threshold` is the first grid value with a non-negative exponent, or null.
 */
export function msf_curve(eta_min: number, eta_max: number, points: number, horizon: number): string;

/**
 * Sends `bits` (a string of 0 and 1) and returns the detected bits, the
 * error signal on the first channel link and the receiver errors between
 * the first receiver node and each of the others.
 */
export function transmit_demo(example: number, bits: string, sigma: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly epsilon_scan: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly msf_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly transmit_demo: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
