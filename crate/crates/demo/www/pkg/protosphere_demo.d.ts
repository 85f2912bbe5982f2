/* tslint:disable */
/* eslint-disable */

/**
 * Projected gradient descent on the uniformity objective, one step per call.
 */
export class Estimator {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Column-major coordinates, `dim` values per prototype.
     */
    coordinates(): Float64Array;
    iteration(): number;
    constructor(dim: number, count: number, learning_rate: number, temperature: number, seed: bigint);
    report(): string;
    /**
     * Runs `n` iterations and returns the loss after the last one.
     */
    step(n: number): number;
}

/**
 * Geometry diagnostics of `count` unit columns packed column-major.
 */
export function describe(dim: number, coordinates: Float64Array): string;

/**
 * Optimal label-to-prototype matching: `result[j]` is the prototype index
 * for class point `j`. Class points are normalized before matching.
 */
export function match_classes(dim: number, class_points: Float64Array, prototypes: Float64Array): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_estimator_free: (a: number, b: number) => void;
    readonly describe: (a: number, b: number, c: number) => [number, number, number, number];
    readonly estimator_coordinates: (a: number) => [number, number];
    readonly estimator_iteration: (a: number) => number;
    readonly estimator_new: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly estimator_report: (a: number) => [number, number];
    readonly estimator_step: (a: number, b: number) => number;
    readonly match_classes: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
