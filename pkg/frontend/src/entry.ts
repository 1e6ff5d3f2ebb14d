import { boot } from "./main";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
boot({ root }).catch((err) => console.error("boot failed", err));
