/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const laser: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
export const resonances: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
export const spacings: (a: number, b: number, c: bigint, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
