// Compile tools/solidity/*.sol with a given solcjs install and print a JSON
// array of {name, compilerVersion, optimize, runtimeBytecodeHex, functionSelectors}.
// usage: node compile_fixtures.js <solc-module-dir> <file.sol>...
const fs = require("fs");
const path = require("path");
const solc = require(path.join(process.argv[2], "node_modules", "solc"));
const files = process.argv.slice(3);
const out = [];
for (const optimize of [false, true]) {
  const sources = {};
  for (const f of files) sources[path.basename(f)] = { content: fs.readFileSync(f, "utf8") };
  const input = {
    language: "Solidity",
    sources,
    settings: {
      optimizer: { enabled: optimize, runs: 200 },
      outputSelection: { "*": { "*": ["evm.deployedBytecode.object", "evm.methodIdentifiers"] } },
    },
  };
  const res = JSON.parse(solc.compile(JSON.stringify(input)));
  for (const e of res.errors || []) {
    if (e.severity === "error") { console.error(e.formattedMessage); process.exit(1); }
  }
  for (const [file, contracts] of Object.entries(res.contracts)) {
    for (const [name, c] of Object.entries(contracts)) {
      out.push({
        name,
        source: file,
        compilerVersion: solc.version(),
        optimize,
        runtimeBytecodeHex: "0x" + c.evm.deployedBytecode.object,
        functionSelectors: Object.fromEntries(
          Object.entries(c.evm.methodIdentifiers).map(([sig, sel]) => [sig, "0x" + sel])
        ),
      });
    }
  }
}
console.log(JSON.stringify(out));
