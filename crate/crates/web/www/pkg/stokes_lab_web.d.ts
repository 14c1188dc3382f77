/* tslint:disable */
/* eslint-disable */

/**
 * Result of one run: status line plus the recorded series as CSV.
 */
export class RunOutput {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly csv: string;
    readonly status: string;
}

/**
 * Reduced kernels along `y₂ = const`: `[y1, S̃₁, S̃₂]` interleaved over
 * `count` points of `(-π, π]`, skipping the origin.
 */
export function kernel_slice(y2: number, count: number): Float64Array;

/**
 * Runs `system` from a single-mode datum (`ε cos kα` for the graph).
 */
export function run_system(system: string, k: number, amplitude: number, n: number, t_end: number): RunOutput;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_runoutput_free: (a: number, b: number) => void;
    readonly kernel_slice: (a: number, b: number) => [number, number];
    readonly run_system: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly runoutput_csv: (a: number) => [number, number];
    readonly runoutput_status: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
