/* tslint:disable */
/* eslint-disable */

/**
 * Heat grid of mean response rank over an equal-width x × y grid.
 */
export function heatGrid(x: Float64Array, y: Float64Array, response: Float64Array, cells: number, min_count: number): string;

/**
 * Generate a synthetic population from a (partial) generator config and
 * run the full pipeline on it.
 */
export function synthExplore(config_json: string): string;

/**
 * γ, Γ and diversification of an edited toy portfolio matrix, against the
 * fixed toy relatedness matrix.
 */
export function toyCoherence(cells: Uint8Array): string;

/**
 * The toy portfolio matrix as 33 row-major 0/1 cells.
 */
export function toyDefault(): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly heatGrid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly synthExplore: (a: number, b: number) => [number, number, number, number];
    readonly toyCoherence: (a: number, b: number) => [number, number, number, number];
    readonly toyDefault: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
