export * from "./types.js";
export * from "./offsets.js";
export * from "./colors.js";
export * from "./bars.js";
export * from "./response.js";
export * from "./claims.js";
export * from "./evidence.js";
export * from "./editor.js";
export * from "./client.js";
export * from "./controller.js";
